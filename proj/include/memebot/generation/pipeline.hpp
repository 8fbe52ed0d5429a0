#ifndef MEMEBOT_GENERATION_PIPELINE_HPP
#define MEMEBOT_GENERATION_PIPELINE_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/compositor/render.hpp"
#include "memebot/error.hpp"
#include "memebot/generation/beam.hpp"
#include "memebot/models/checkpoint.hpp"
#include "memebot/models/selector.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

namespace memebot {

/// Everything a generation call reads. Nothing here is mutated, so one
/// instance can serve concurrent requests.
struct MemePipeline {
  const TemplateCatalog& catalog;
  const LoadedSelector* selector;  // may be null when every call forces a template
  const LoadedGenerator& generator;
  const TagLexicon& tags;
  const BitmapFont& font;
};

struct GeneratedMeme {
  std::string sentence;
  TemplateId template_id = 0;
  std::string template_name;
  double probability = 0.0;  // selector probability of the chosen template
  std::vector<TemplateScore> ranking;  // full selector ranking; empty without a selector
  TokenSequence caption_tokens;        // includes the trailing EOS when finished
  std::string caption;
  double score = 0.0;
  std::size_t image_index = 0;
  std::string image_path;
  Image image;
};

/// Encoder content ids for a sentence under the generator's variant.
inline TokenSequence sentence_content(std::string_view sentence, const LoadedGenerator& gen, const TagLexicon& tags) {
  if (gen.model.variant() == Variant::MT2MC) return {};
  return gen.vocab.encode_tokens(content_words(sentence, tags, gen.meta.np_plus_v));
}

/// Caption for a fixed template; no selector involved.
inline DecodeResult generate_caption(std::string_view sentence, TemplateId template_id, const LoadedGenerator& gen,
                                     const TagLexicon& tags, const DecodeParams& params) {
  const auto content = sentence_content(sentence, gen, tags);
  const auto meme = encode_meme(template_id, content, gen.model, gen.vocab);
  DecodeParams p = params;
  p.max_len = std::min(p.max_len, gen.model.config().max_len);
  return beam_search(meme, gen.model, gen.vocab, p);
}

/// sentence -> template -> caption -> composed image. The template is the
/// forced one when set, else the selector's top-1. The image variant is a
/// uniform draw seeded by `seed`.
inline GeneratedMeme generate_meme(std::string_view sentence, const MemePipeline& pipe, const DecodeParams& params,
                                   std::uint64_t seed) {
  params.validate();
  if (split_whitespace(sentence).empty()) throw Error(Errc::EmptyInput, "sentence is empty");
  GeneratedMeme out;
  out.sentence = std::string(sentence);
  if (pipe.selector) {
    out.ranking = select_template(sentence, pipe.selector->model, pipe.selector->vocab, pipe.catalog);
  }
  if (params.forced_template) {
    if (*params.forced_template >= pipe.catalog.size()) {
      throw Error(Errc::UnknownTemplate, "template id " + std::to_string(*params.forced_template) + " not in catalog");
    }
    out.template_id = *params.forced_template;
  } else {
    if (out.ranking.empty()) throw Error(Errc::ConfigError, "no selector loaded and no template forced");
    out.template_id = out.ranking.front().template_id;
  }
  for (const auto& r : out.ranking) {
    if (r.template_id == out.template_id) out.probability = r.probability;
  }
  const auto& entry = pipe.catalog[out.template_id];
  out.template_name = entry.name;

  const auto result = generate_caption(sentence, out.template_id, pipe.generator, pipe.tags, params);
  out.caption_tokens = result.tokens;
  out.caption = pipe.generator.vocab.decode(result.tokens);
  out.score = result.score;

  Rng rng(seed);
  out.image_index = static_cast<std::size_t>(rng.below(entry.image_paths.size()));
  out.image_path = entry.image_paths[out.image_index].string();
  out.image = render_meme(entry, out.caption, out.image_index, pipe.font);
  return out;
}

}  // namespace memebot

#endif  // MEMEBOT_GENERATION_PIPELINE_HPP
