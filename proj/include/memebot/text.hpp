#ifndef MEMEBOT_TEXT_HPP
#define MEMEBOT_TEXT_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/util.hpp"

namespace memebot {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

/// Lowercases, splits on whitespace and strips punctuation from both ends of
/// every token. Interior punctuation ("didn't") survives.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& raw : split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (b == e) continue;
    out.push_back(to_lower(std::string_view(raw).substr(b, e - b)));
  }
  return out;
}

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kMask = 4;
  static constexpr TokenId kNumReserved = 5;

  static const std::vector<std::string>& reserved_tokens() {
    static const std::vector<std::string> tokens = {"<pad>", "<bos>", "<eos>", "<unk>", "<mask>"};
    return tokens;
  }

  Vocabulary() : Vocabulary(reserved_tokens()) {}

  /// `tokens[i]` gets id i. The reserved tokens must come first; the
  /// angle-bracketed tokens that follow them are the template tokens.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    const auto& reserved = reserved_tokens();
    if (tokens_.size() < reserved.size() ||
        !std::equal(reserved.begin(), reserved.end(), tokens_.begin())) {
      throw Error(Errc::CorruptFile, "vocabulary must start with the reserved tokens");
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].empty()) throw Error(Errc::CorruptFile, "empty vocabulary token at id " + std::to_string(i));
      if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
        throw Error(Errc::CorruptFile, "duplicate vocabulary token '" + tokens_[i] + "'");
      }
    }
    std::size_t i = reserved.size();
    while (i < tokens_.size() && is_template_token(tokens_[i])) ++i;
    num_templates_ = i - reserved.size();
  }

  static bool is_template_token(std::string_view t) {
    return t.size() > 2 && t.front() == '<' && t.back() == '>';
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t num_templates() const { return num_templates_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TokenId id(std::string_view token) const { return find(token).value_or(kUnk); }

  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw Error(Errc::InvalidId, "token id " + std::to_string(id) + " out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  TokenId template_token(TemplateId template_id) const {
    if (template_id >= num_templates_) {
      throw Error(Errc::UnknownTemplate, "template id " + std::to_string(template_id) + " has no token");
    }
    return static_cast<TokenId>(kNumReserved + template_id);
  }

  TokenSequence encode_tokens(const std::vector<std::string>& words) const {
    TokenSequence ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(id(w));
    return ids;
  }

  TokenSequence encode(std::string_view text) const { return encode_tokens(tokenize(text)); }

  /// Drops PAD/BOS/EOS and joins the rest with single spaces.
  std::string decode(std::span<const TokenId> ids) const {
    std::vector<std::string> words;
    for (TokenId id : ids) {
      const auto& t = token(id);
      if (id == kPad || id == kBos || id == kEos) continue;
      words.push_back(t);
    }
    return join(words, " ");
  }

  std::string serialize() const {
    std::string out;
    for (const auto& t : tokens_) {
      out += t;
      out += '\n';
    }
    return out;
  }

  void save(const std::filesystem::path& path) const { write_file(path, serialize()); }

  static Vocabulary load(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return Vocabulary(std::move(lines));
  }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t num_templates_ = 0;
};

/// Reserved tokens, then one token per catalog template, then corpus tokens
/// with count >= min_freq ordered by (count desc, token asc).
inline Vocabulary build_vocab(const std::vector<MemeSample>& corpus, const TemplateCatalog& catalog,
                              std::size_t min_freq) {
  if (min_freq < 1) throw Error(Errc::ConfigError, "min_freq must be >= 1");
  std::vector<std::string> tokens = Vocabulary::reserved_tokens();
  for (const auto& e : catalog.entries()) tokens.push_back(e.token);

  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus) {
    for (auto& w : tokenize(s.caption)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [w, c] : counts) {
    if (c >= min_freq) ranked.emplace_back(w, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (auto& [w, c] : ranked) tokens.push_back(w);
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------
// Part-of-speech tagging and content masking.

enum class Pos { NOUN, PROPN, VERB, ADJ, DET, ADP, ADV, PRON, NUM, OTHER };

inline std::string_view pos_name(Pos p) {
  switch (p) {
    case Pos::NOUN: return "NOUN";
    case Pos::PROPN: return "PROPN";
    case Pos::VERB: return "VERB";
    case Pos::ADJ: return "ADJ";
    case Pos::DET: return "DET";
    case Pos::ADP: return "ADP";
    case Pos::ADV: return "ADV";
    case Pos::PRON: return "PRON";
    case Pos::NUM: return "NUM";
    case Pos::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<Pos> parse_pos(std::string_view name) {
  static const std::pair<std::string_view, Pos> table[] = {
      {"NOUN", Pos::NOUN}, {"PROPN", Pos::PROPN}, {"VERB", Pos::VERB}, {"ADJ", Pos::ADJ},
      {"DET", Pos::DET},   {"ADP", Pos::ADP},     {"ADV", Pos::ADV},   {"PRON", Pos::PRON},
      {"NUM", Pos::NUM},   {"OTHER", Pos::OTHER}};
  for (auto& [n, p] : table) {
    if (n == name) return p;
  }
  return std::nullopt;
}

/// Word lexicon plus suffix rules. Lookup precedence: exact word, then the
/// longest matching suffix, then NOUN.
class TagLexicon {
 public:
  TagLexicon() = default;
  TagLexicon(std::unordered_map<std::string, Pos> words, std::vector<std::pair<std::string, Pos>> suffixes)
      : words_(std::move(words)), suffixes_(std::move(suffixes)) {}

  Pos tag(std::string_view word) const {
    const std::string w = to_lower(word);
    if (auto it = words_.find(w); it != words_.end()) return it->second;
    std::optional<Pos> best;
    std::size_t best_len = 0;
    for (const auto& [suffix, p] : suffixes_) {
      if (suffix.size() < w.size() && suffix.size() > best_len &&
          w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0) {
        best = p;
        best_len = suffix.size();
      }
    }
    return best.value_or(Pos::NOUN);
  }

  std::size_t word_count() const { return words_.size(); }
  std::size_t suffix_count() const { return suffixes_.size(); }

  /// TSV `word<TAB>TAG`; lines after a `#suffix` marker are suffix rules.
  /// Other lines starting with '#' are comments.
  static TagLexicon parse(std::string_view text) {
    std::unordered_map<std::string, Pos> words;
    std::vector<std::pair<std::string, Pos>> suffixes;
    bool in_suffix = false;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (collapse_whitespace(line).empty()) continue;
      if (line.rfind("#suffix", 0) == 0) {
        in_suffix = true;
        continue;
      }
      if (line[0] == '#') continue;
      auto fields = split(line, '\t');
      if (fields.size() != 2) {
        throw Error(Errc::MalformedLine, "tag lexicon line " + std::to_string(line_no));
      }
      auto pos = parse_pos(collapse_whitespace(fields[1]));
      if (!pos) throw Error(Errc::MalformedLine, "unknown tag on line " + std::to_string(line_no));
      auto key = to_lower(collapse_whitespace(fields[0]));
      if (in_suffix) {
        suffixes.emplace_back(std::move(key), *pos);
      } else {
        words[std::move(key)] = *pos;
      }
    }
    return TagLexicon(std::move(words), std::move(suffixes));
  }

  static TagLexicon load(const std::filesystem::path& path) { return parse(read_file(path)); }

 private:
  std::unordered_map<std::string, Pos> words_;
  std::vector<std::pair<std::string, Pos>> suffixes_;
};

inline std::vector<Pos> pos_tag(const std::vector<std::string>& tokens, const TagLexicon& lexicon) {
  std::vector<Pos> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(lexicon.tag(t));
  return tags;
}

/// Keeps nouns (NOUN/PROPN/NUM), the ADJ run directly before a kept noun and,
/// when `keep_verbs`, VERB tokens. If nothing survives the input is returned
/// minus any VERB tokens that the mode excludes.
inline std::vector<std::string> mask_to_content(const std::vector<std::string>& tokens,
                                                const std::vector<Pos>& tags, bool keep_verbs = true) {
  if (tokens.size() != tags.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(tokens.size()) + " tokens vs " +
                                          std::to_string(tags.size()) + " tags");
  }
  const auto is_noun = [](Pos p) { return p == Pos::NOUN || p == Pos::PROPN || p == Pos::NUM; };
  std::vector<bool> keep(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_noun(tags[i])) {
      keep[i] = true;
      for (std::size_t j = i; j > 0 && tags[j - 1] == Pos::ADJ; --j) keep[j - 1] = true;
    } else if (keep_verbs && tags[i] == Pos::VERB) {
      keep[i] = true;
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (keep[i]) out.push_back(tokens[i]);
  }
  if (!out.empty()) return out;
  if (keep_verbs) return tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tags[i] != Pos::VERB) out.push_back(tokens[i]);
  }
  return out;
}

/// tokenize -> tag -> mask in one call: the encoder input for a sentence.
inline std::vector<std::string> content_words(std::string_view sentence, const TagLexicon& lexicon,
                                              bool keep_verbs = true) {
  auto tokens = tokenize(sentence);
  return mask_to_content(tokens, pos_tag(tokens, lexicon), keep_verbs);
}

}  // namespace memebot

#endif  // MEMEBOT_TEXT_HPP
