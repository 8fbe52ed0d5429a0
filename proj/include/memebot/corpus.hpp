#ifndef MEMEBOT_CORPUS_HPP
#define MEMEBOT_CORPUS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

namespace memebot {

inline std::string normalize_caption(std::string_view caption) {
  return to_lower(collapse_whitespace(caption));
}

/// Parses JSON-lines text: one {"template":..., "caption":...} object per
/// line. Blank lines are skipped; line numbers in errors are 1-based.
inline std::vector<MemeSample> parse_corpus(std::string_view text, const TemplateCatalog& catalog) {
  std::vector<MemeSample> samples;
  std::size_t line_no = 0;
  for (auto& line : split(text, '\n')) {
    ++line_no;
    if (collapse_whitespace(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": not valid JSON");
    }
    if (!obj.is_object() || !obj.contains("template") || !obj.contains("caption") ||
        !obj["template"].is_string() || !obj["caption"].is_string()) {
      throw Error(Errc::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected string fields 'template' and 'caption'");
    }
    const auto name = obj["template"].get<std::string>();
    const auto id = catalog.find(name);
    if (!id) {
      throw Error(Errc::UnknownTemplate, "line " + std::to_string(line_no) + ": unknown template '" + name + "'");
    }
    auto caption = normalize_caption(obj["caption"].get<std::string>());
    if (caption.empty()) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": empty caption");
    }
    samples.push_back({*id, std::move(caption)});
  }
  return samples;
}

inline std::vector<MemeSample> load_corpus(const std::filesystem::path& path, const TemplateCatalog& catalog) {
  if (!std::filesystem::exists(path)) throw Error(Errc::IoError, "corpus file not found: " + path.string());
  return parse_corpus(read_file(path), catalog);
}

inline std::string corpus_to_jsonl(const std::vector<MemeSample>& samples, const TemplateCatalog& catalog) {
  std::string out;
  for (const auto& s : samples) {
    nlohmann::json obj = {{"template", catalog[s.template_id].name}, {"caption", s.caption}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<MemeSample> train;
  std::vector<MemeSample> validation;
  std::vector<MemeSample> test;
  std::uint64_t seed = 0;
};

/// Largest-remainder apportionment of `total` items; ties in the fractional
/// part go to the earlier partition.
inline std::array<std::size_t, 3> split_sizes(std::size_t total, const SplitRatios& r) {
  const std::array<double, 3> ratios = {r.train, r.validation, r.test};
  for (double x : ratios) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(Errc::BadRatios, "ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error(Errc::BadRatios, "ratios must sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(total);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

/// Seeded shuffle, then contiguous train/validation/test cut.
inline CorpusSplit split_corpus(std::vector<MemeSample> samples, const SplitRatios& ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(samples.size(), ratios);
  Rng rng(seed);
  rng.shuffle(samples);
  CorpusSplit split;
  split.seed = seed;
  auto first = samples.begin();
  split.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
  first += static_cast<std::ptrdiff_t>(sizes[0]);
  split.validation.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
  first += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test.assign(first, samples.end());
  return split;
}

/// Per-template caption counts, indexed by template id.
inline std::vector<std::size_t> corpus_stats(const std::vector<MemeSample>& samples, const TemplateCatalog& catalog) {
  std::vector<std::size_t> counts(catalog.size(), 0);
  for (const auto& s : samples) ++counts.at(s.template_id);
  return counts;
}

// ---------------------------------------------------------------------------
// Sentiment gate for evaluation sentences.

class SentimentLexicon {
 public:
  /// Normalization constant in V / sqrt(V^2 + alpha).
  static constexpr double kAlpha = 15.0;

  SentimentLexicon() = default;
  explicit SentimentLexicon(std::unordered_map<std::string, double> valences) {
    for (auto& [w, v] : valences) valences_[to_lower(w)] = v;
  }

  double valence(std::string_view word) const {
    auto it = valences_.find(to_lower(word));
    return it == valences_.end() ? 0.0 : it->second;
  }

  std::size_t size() const { return valences_.size(); }

  /// TSV `word<TAB>valence`; '#' lines are comments.
  static SentimentLexicon parse(std::string_view text) {
    std::unordered_map<std::string, double> valences;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (collapse_whitespace(line).empty() || line[0] == '#') continue;
      auto fields = split(line, '\t');
      if (fields.size() != 2) throw Error(Errc::MalformedLine, "lexicon line " + std::to_string(line_no));
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[1], &used);
        if (!collapse_whitespace(fields[1].substr(used)).empty()) throw std::invalid_argument("trailing");
        valences[to_lower(collapse_whitespace(fields[0]))] = v;
      } catch (const std::logic_error&) {
        throw Error(Errc::MalformedLine, "lexicon line " + std::to_string(line_no) + ": bad valence");
      }
    }
    return SentimentLexicon(std::move(valences));
  }

  static SentimentLexicon load(const std::filesystem::path& path) { return parse(read_file(path)); }

 private:
  std::unordered_map<std::string, double> valences_;
};

/// Sum of token valences squashed into [-1, 1].
inline double sentiment_score(std::string_view sentence, const SentimentLexicon& lexicon) {
  double total = 0.0;
  for (const auto& w : tokenize(sentence)) total += lexicon.valence(w);
  if (total == 0.0) return 0.0;
  return total / std::sqrt(total * total + SentimentLexicon::kAlpha);
}

inline std::vector<std::string> filter_non_negative(const std::vector<std::string>& sentences,
                                                    const SentimentLexicon& lexicon) {
  std::vector<std::string> kept;
  for (const auto& s : sentences) {
    if (sentiment_score(s, lexicon) >= 0.0) kept.push_back(s);
  }
  return kept;
}

}  // namespace memebot

#endif  // MEMEBOT_CORPUS_HPP
