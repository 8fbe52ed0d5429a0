#include <gtest/gtest.h>

#include "criteria.hpp"
#include "support.hpp"

namespace memebot {
namespace {

using testing::error_code;

const BitmapFont& font() {
  static const BitmapFont f = BitmapFont::load_default();
  return f;
}

std::array<std::uint8_t, 3> rgb(const Image& img, int x, int y) {
  const auto* p = img.at(x, y);
  return {p[0], p[1], p[2]};
}

TEST(Font, ShippedFontCoversAscii) {
  EXPECT_EQ(font().height(), 7);
  for (char c = 0x20; c < 0x7f; ++c) EXPECT_EQ(font().advance(c), 6) << c;
  EXPECT_EQ(font().text_width("abc"), 18);
  EXPECT_EQ(BitmapFont::parse(font().serialize()).glyph_count(), font().glyph_count());
}

TEST(Font, RejectsCorruptBytes) {
  EXPECT_EQ(error_code([] { BitmapFont::parse("XXXX"); }), Errc::CorruptFile);
  const auto bytes = font().serialize();
  EXPECT_EQ(error_code([&] { BitmapFont::parse(bytes.substr(0, bytes.size() - 1)); }), Errc::CorruptFile);
}

TEST(WrapText, FitsOnOneLineExactly) {
  // "hello world" = 5*6 + 6 + 5*6 = 66 px.
  EXPECT_EQ(wrap_text("hello world", font(), 66), std::vector<std::string>{"hello world"});
  EXPECT_EQ(wrap_text("hello world", font(), 65), (std::vector<std::string>{"hello", "world"}));
}

TEST(WrapText, BreaksLongWordsBetweenGlyphs) {
  EXPECT_EQ(wrap_text("abcdefghij", font(), 30), (std::vector<std::string>{"abcde", "fghij"}));
  EXPECT_EQ(wrap_text("abc", font(), 3), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(WrapText, ScaleMultipliesWidths) {
  EXPECT_EQ(wrap_text("ab cd", font(), 30, 2), (std::vector<std::string>{"ab", "cd"}));
  EXPECT_EQ(wrap_text("ab cd", font(), 60, 2), std::vector<std::string>{"ab cd"});
  EXPECT_TRUE(wrap_text("   ", font(), 60).empty());
}

TEST(WrapText, NoLineExceedsWidth) {
  Rng rng(4);
  const std::string words[] = {"a", "meme", "when", "fortnite", "supercalifragilistic", "x"};
  for (int t = 0; t < 200; ++t) {
    std::string s;
    for (int i = 0; i < 8; ++i) s += words[rng.below(6)] + " ";
    const int width = 6 + static_cast<int>(rng.below(120));
    const auto lines = wrap_text(s, font(), width);
    std::string joined;
    for (const auto& l : lines) {
      EXPECT_LE(font().text_width(l), width);
      joined += l;
    }
    std::string expect;
    for (char c : s) {
      if (c != ' ') expect += c;
    }
    joined.erase(std::remove(joined.begin(), joined.end(), ' '), joined.end());
    EXPECT_EQ(joined, expect);
  }
}

TEST(RenderCaption, EmptyCaptionIsNoOp) {
  const Image img(40, 20, 100, 100, 100);
  RenderSpec spec;
  spec.box = {5, 3, 30, 14};
  spec.caption = "   ";
  EXPECT_EQ(render_caption(img, spec, font()), img);
}

TEST(RenderCaption, GlyphPixelsLandAtBoxOffsets) {
  const Image img(40, 20, 100, 100, 100);
  RenderSpec spec;
  spec.box = {5, 3, 30, 14};
  spec.caption = "i";
  spec.scale = 1;
  const auto out = render_caption(img, spec, font());
  // Text area starts at (6, 4), width 28; "I" is 6 px wide -> pen x 6 + 11 = 17.
  // Row 0 of 'I' is .###.... -> x 18..20; row 1 is ..#..... -> x 19.
  const std::array<std::uint8_t, 3> white{255, 255, 255}, black{0, 0, 0}, gray{100, 100, 100};
  EXPECT_EQ(rgb(out, 18, 4), white);
  EXPECT_EQ(rgb(out, 19, 4), white);
  EXPECT_EQ(rgb(out, 20, 4), white);
  EXPECT_EQ(rgb(out, 19, 5), white);
  EXPECT_EQ(rgb(out, 18, 5), black);  // outline
  EXPECT_EQ(rgb(out, 17, 3), black);  // outline on the box edge
  EXPECT_EQ(rgb(out, 8, 12), gray);
  EXPECT_EQ(rgb(out, 0, 0), gray);
  // Nothing outside the box changes.
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (x >= 5 && x < 35 && y >= 3 && y < 17) continue;
      ASSERT_EQ(rgb(out, x, y), gray) << x << "," << y;
    }
  }
}

TEST(RenderCaption, AutoScaleFitsBox) {
  const Image img(200, 100, 0, 0, 0);
  RenderSpec spec;
  spec.box = {10, 10, 180, 30};
  spec.caption = "hi";
  const auto layout = layout_caption("HI", font(), spec);
  // 2 glyphs * 6 * s <= 178 and 7 * s <= 28 -> s = 4.
  EXPECT_EQ(layout.scale, 4);
  EXPECT_EQ(layout.lines, std::vector<std::string>{"HI"});
}

TEST(RenderCaption, BoxOutOfBounds) {
  const Image img(40, 20);
  RenderSpec spec;
  spec.caption = "x";
  for (const Box b : {Box{-1, 0, 10, 10}, Box{35, 0, 10, 10}, Box{0, 15, 10, 10}, Box{0, 0, 0, 5}}) {
    spec.box = b;
    EXPECT_EQ(error_code([&] { render_caption(img, spec, font()); }), Errc::BoxOutOfBounds);
  }
}

TEST(RenderMeme, PreservesDimensionsAndIsDeterministic) {
  const auto catalog = testing::desk_catalog();
  for (const auto& e : catalog.entries()) {
    const auto base = load_png(e.image_paths.front());
    const auto a = render_meme(e, "when you win your first fortnite game", 0, font());
    EXPECT_EQ(a.width, base.width);
    EXPECT_EQ(a.height, base.height);
    EXPECT_NE(a, base) << e.name;
    EXPECT_EQ(encode_png(a), encode_png(render_meme(e, "when you win your first fortnite game", 0, font())));
  }
}

TEST(RenderMeme, MissingVariantAndImage) {
  const auto catalog = testing::desk_catalog();
  const auto& e = catalog[0];
  EXPECT_EQ(error_code([&] { render_meme(e, "x", e.image_paths.size(), font()); }), Errc::MissingImage);
  CatalogEntry ghost = e;
  ghost.image_paths = {"/nonexistent/ghost.png"};
  EXPECT_TRUE(error_code([&] { render_meme(ghost, "x", 0, font()); }).has_value());
}

TEST(ComposeMeme, WritesPng) {
  testing::TempDir dir;
  const auto catalog = testing::desk_catalog();
  const auto img = compose_meme(catalog[0], "hello", 0, dir / "out.png", font());
  EXPECT_EQ(load_png(dir / "out.png"), img);
}

TEST(Png, RoundTrip) {
  Image img(3, 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 13);
  EXPECT_EQ(decode_png(encode_png(img)), img);
  EXPECT_THROW(decode_png("not a png"), Error);
}

TEST(Golden, SuccessKidMatchesPinnedBytes) {
  ASSERT_TRUE(std::filesystem::exists(criteria::golden_png_path()));
  EXPECT_EQ(criteria::golden_png_bytes(), read_file(criteria::golden_png_path()));
}

}  // namespace
}  // namespace memebot
