#ifndef MEMEBOT_COMPOSITOR_RENDER_HPP
#define MEMEBOT_COMPOSITOR_RENDER_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/compositor/font.hpp"
#include "memebot/compositor/image.hpp"
#include "memebot/error.hpp"
#include "memebot/util.hpp"

namespace memebot {

using Rgb = std::array<std::uint8_t, 3>;

struct RenderSpec {
  std::string caption;
  Box box;
  Rgb fill{255, 255, 255};
  Rgb outline{0, 0, 0};
  int line_spacing = 2;  // font pixels between lines, multiplied by the scale
  int scale = 0;         // 0 picks the largest scale in [1, kMaxScale] that fits
  bool uppercase = true;

  static constexpr int kMaxScale = 6;
};

/// Greedy word wrap measured in pixels at `scale`. Words wider than the box
/// are broken between glyphs. If the box is narrower than a single glyph,
/// each such glyph gets its own line.
inline std::vector<std::string> wrap_text(std::string_view caption, const BitmapFont& font, int box_width_px,
                                          int scale = 1) {
  std::vector<std::string> lines;
  const auto width = [&](std::string_view s) { return font.text_width(s) * scale; };
  const int space = font.advance(' ') * scale;
  std::string line;
  int line_w = 0;
  const auto flush = [&] {
    if (!line.empty()) lines.push_back(line);
    line.clear();
    line_w = 0;
  };
  for (const auto& word : split_whitespace(caption)) {
    const int ww = width(word);
    if (!line.empty() && line_w + space + ww <= box_width_px) {
      line += ' ';
      line += word;
      line_w += space + ww;
      continue;
    }
    flush();
    if (ww <= box_width_px) {
      line = word;
      line_w = ww;
      continue;
    }
    for (char c : word) {
      const int cw = font.advance(c) * scale;
      if (!line.empty() && line_w + cw > box_width_px) flush();
      line += c;
      line_w += cw;
    }
  }
  flush();
  return lines;
}

namespace detail {

inline void check_box(const Image& img, const Box& b) {
  if (b.w <= 0 || b.h <= 0 || b.x < 0 || b.y < 0 || b.x + b.w > img.width || b.y + b.h > img.height) {
    throw Error(Errc::BoxOutOfBounds, "caption box (" + std::to_string(b.x) + "," + std::to_string(b.y) + "," +
                                          std::to_string(b.w) + "," + std::to_string(b.h) + ") outside " +
                                          std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
  }
}

struct Layout {
  int scale = 1;
  std::vector<std::string> lines;
};

inline int layout_height(const Layout& l, const BitmapFont& font, int spacing) {
  const int n = static_cast<int>(l.lines.size());
  return n == 0 ? 0 : n * font.height() * l.scale + (n - 1) * spacing * l.scale;
}

}  // namespace detail

/// Text area inside the box: one pixel is reserved on each side for the outline.
inline Box text_area(const Box& box) { return {box.x + 1, box.y + 1, std::max(box.w - 2, 1), std::max(box.h - 2, 1)}; }

inline detail::Layout layout_caption(std::string_view text, const BitmapFont& font, const RenderSpec& spec) {
  const Box area = text_area(spec.box);
  if (spec.scale > 0) return {spec.scale, wrap_text(text, font, area.w, spec.scale)};
  detail::Layout fallback{1, wrap_text(text, font, area.w, 1)};
  for (int s = RenderSpec::kMaxScale; s >= 1; --s) {
    detail::Layout l{s, wrap_text(text, font, area.w, s)};
    const bool fits_width = std::all_of(l.lines.begin(), l.lines.end(),
                                        [&](const std::string& line) { return font.text_width(line) * s <= area.w; });
    if (fits_width && detail::layout_height(l, font, spec.line_spacing) <= area.h) return l;
  }
  return fallback;
}

/// Draws the caption into a copy of `image`. Lines are centered in the box
/// and stacked from its top. Only pixels inside the box are written.
inline Image render_caption(const Image& image, const RenderSpec& spec, const BitmapFont& font) {
  detail::check_box(image, spec.box);
  Image out = image;
  const std::string text = collapse_whitespace(spec.uppercase ? to_upper(spec.caption) : spec.caption);
  if (text.empty()) return out;

  const Box& box = spec.box;
  const Box area = text_area(box);
  const auto layout = layout_caption(text, font, spec);
  const int s = layout.scale;

  // Fill mask in box-local coordinates.
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(box.w) * box.h, 0);
  const auto set = [&](int x, int y) {
    const int lx = x - box.x;
    const int ly = y - box.y;
    if (lx >= 0 && ly >= 0 && lx < box.w && ly < box.h) mask[static_cast<std::size_t>(ly) * box.w + lx] = 1;
  };
  for (std::size_t li = 0; li < layout.lines.size(); ++li) {
    const auto& line = layout.lines[li];
    int pen_x = area.x + (area.w - font.text_width(line) * s) / 2;
    const int top = area.y + static_cast<int>(li) * (font.height() + spec.line_spacing) * s;
    for (char c : line) {
      const Glyph& g = font.glyph(static_cast<unsigned char>(c));
      for (int gy = 0; gy < font.height(); ++gy) {
        for (int gx = 0; gx < 8; ++gx) {
          if (!g.pixel(gx, gy)) continue;
          for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) set(pen_x + gx * s + dx, top + gy * s + dy);
          }
        }
      }
      pen_x += g.advance * s;
    }
  }

  const auto filled = [&](int lx, int ly) {
    return lx >= 0 && ly >= 0 && lx < box.w && ly < box.h && mask[static_cast<std::size_t>(ly) * box.w + lx];
  };
  for (int ly = 0; ly < box.h; ++ly) {
    for (int lx = 0; lx < box.w; ++lx) {
      const Rgb* color = nullptr;
      if (filled(lx, ly)) {
        color = &spec.fill;
      } else {
        for (int dy = -1; dy <= 1 && !color; ++dy) {
          for (int dx = -1; dx <= 1 && !color; ++dx) {
            if (filled(lx + dx, ly + dy)) color = &spec.outline;
          }
        }
      }
      if (!color) continue;
      auto* px = out.at(box.x + lx, box.y + ly);
      px[0] = (*color)[0];
      px[1] = (*color)[1];
      px[2] = (*color)[2];
    }
  }
  return out;
}

/// Band used when a catalog entry has no caption_box: a quarter of the image
/// height at the top or bottom, inset by 1/20 of the width.
inline Box default_caption_box(int width, int height, CaptionPosition position) {
  const int mx = width / 20;
  const int my = height / 40;
  const int h = std::max(height / 4, 1);
  const int y = position == CaptionPosition::Top ? my : height - h - my;
  return {mx, std::max(y, 0), std::max(width - 2 * mx, 1), h};
}

inline Box caption_box_for(const CatalogEntry& entry, const Image& image) {
  return entry.caption_box ? *entry.caption_box : default_caption_box(image.width, image.height, entry.position);
}

/// Loads image variant `variant_index` of the entry and draws the caption.
inline Image render_meme(const CatalogEntry& entry, std::string_view caption, std::size_t variant_index,
                         const BitmapFont& font) {
  if (variant_index >= entry.image_paths.size()) {
    throw Error(Errc::MissingImage, entry.name + " has no image variant " + std::to_string(variant_index));
  }
  const Image base = load_png(entry.image_paths[variant_index]);
  RenderSpec spec;
  spec.caption = std::string(caption);
  spec.box = caption_box_for(entry, base);
  return render_caption(base, spec, font);
}

inline Image compose_meme(const CatalogEntry& entry, std::string_view caption, std::size_t variant_index,
                          const std::filesystem::path& out_path, const BitmapFont& font) {
  Image img = render_meme(entry, caption, variant_index, font);
  save_png(img, out_path);
  return img;
}

}  // namespace memebot

#endif  // MEMEBOT_COMPOSITOR_RENDER_HPP
