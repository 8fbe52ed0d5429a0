#ifndef MEMEBOT_COMPOSITOR_FONT_HPP
#define MEMEBOT_COMPOSITOR_FONT_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "memebot/error.hpp"
#include "memebot/util.hpp"

namespace memebot {

/// One glyph: `rows[y]` holds up to 8 pixels, bit 7 is the leftmost column.
struct Glyph {
  std::uint8_t advance = 0;
  std::vector<std::uint8_t> rows;

  bool pixel(int x, int y) const { return x >= 0 && x < 8 && (rows[static_cast<std::size_t>(y)] >> (7 - x)) & 1u; }
};

/// Fixed-height bitmap font in the MBF1 format:
///   "MBF1" | u8 glyph height | records until EOF
///   record: u32 codepoint (LE) | u8 advance | `height` row bytes
/// Codepoints without a glyph render with the fallback glyph (U+FFFD when
/// the file has one, else '?').
class BitmapFont {
 public:
  static constexpr std::uint32_t kFallbackCodepoint = 0xFFFD;

  BitmapFont() = default;
  BitmapFont(int height, std::map<std::uint32_t, Glyph> glyphs) : height_(height), glyphs_(std::move(glyphs)) {
    if (height_ <= 0) throw Error(Errc::CorruptFile, "font height must be positive");
    for (auto& [cp, g] : glyphs_) {
      if (g.rows.size() != static_cast<std::size_t>(height_)) throw Error(Errc::CorruptFile, "glyph row count mismatch");
    }
    for (std::uint32_t cp = 0x20; cp <= 0x7e; ++cp) {
      if (!glyphs_.count(cp)) throw Error(Errc::CorruptFile, "font lacks printable ASCII glyph " + std::to_string(cp));
    }
  }

  int height() const { return height_; }
  std::size_t glyph_count() const { return glyphs_.size(); }

  const Glyph& glyph(std::uint32_t codepoint) const {
    if (auto it = glyphs_.find(codepoint); it != glyphs_.end()) return it->second;
    if (auto it = glyphs_.find(kFallbackCodepoint); it != glyphs_.end()) return it->second;
    return glyphs_.at('?');
  }

  /// Advance of one byte of text; non-ASCII bytes use the fallback glyph.
  int advance(char c) const { return glyph(static_cast<unsigned char>(c)).advance; }

  int text_width(std::string_view s) const {
    int w = 0;
    for (char c : s) w += advance(c);
    return w;
  }

  int max_advance() const {
    int m = 0;
    for (auto& [cp, g] : glyphs_) m = std::max(m, static_cast<int>(g.advance));
    return m;
  }

  std::string serialize() const {
    std::string out = "MBF1";
    out.push_back(static_cast<char>(height_));
    for (auto& [cp, g] : glyphs_) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((cp >> (8 * i)) & 0xff));
      out.push_back(static_cast<char>(g.advance));
      for (auto r : g.rows) out.push_back(static_cast<char>(r));
    }
    return out;
  }

  static BitmapFont parse(std::string_view bytes) {
    if (bytes.size() < 5 || bytes.substr(0, 4) != "MBF1") throw Error(Errc::CorruptFile, "bad font magic");
    const int height = static_cast<unsigned char>(bytes[4]);
    if (height == 0) throw Error(Errc::CorruptFile, "font height is zero");
    const std::size_t record = 5 + static_cast<std::size_t>(height);
    std::size_t pos = 5;
    if ((bytes.size() - pos) % record != 0) throw Error(Errc::CorruptFile, "font file truncated");
    std::map<std::uint32_t, Glyph> glyphs;
    for (; pos < bytes.size(); pos += record) {
      std::uint32_t cp = 0;
      for (int i = 0; i < 4; ++i) cp |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
      Glyph g;
      g.advance = static_cast<std::uint8_t>(bytes[pos + 4]);
      for (int r = 0; r < height; ++r) g.rows.push_back(static_cast<std::uint8_t>(bytes[pos + 5 + r]));
      glyphs[cp] = std::move(g);
    }
    return BitmapFont(height, std::move(glyphs));
  }

  static BitmapFont load(const std::filesystem::path& path) { return parse(read_file(path)); }

  /// The font shipped in the data directory.
  static BitmapFont load_default() { return load(data_dir() / "font" / "memebot5x7.mbf"); }

 private:
  int height_ = 0;
  std::map<std::uint32_t, Glyph> glyphs_;
};

}  // namespace memebot

#endif  // MEMEBOT_COMPOSITOR_FONT_HPP
