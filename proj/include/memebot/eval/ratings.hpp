#ifndef MEMEBOT_EVAL_RATINGS_HPP
#define MEMEBOT_EVAL_RATINGS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memebot/error.hpp"
#include "memebot/eval/kappa.hpp"
#include "memebot/util.hpp"

namespace memebot {

struct RatingRecord {
  std::string meme_id;
  std::string rater_id;
  int coherence = 1;  // 1..4
  int relevance = 1;  // 1..4
  bool likes = false;
};

enum class RatingMetric { Coherence, Relevance, Likes };

inline RatingMetric parse_rating_metric(std::string_view name) {
  const auto key = to_lower(name);
  if (key == "coherence") return RatingMetric::Coherence;
  if (key == "relevance") return RatingMetric::Relevance;
  if (key == "likes") return RatingMetric::Likes;
  throw Error(Errc::ConfigError, "unknown metric '" + std::string(name) + "'");
}

inline int metric_value(const RatingRecord& r, RatingMetric m) {
  switch (m) {
    case RatingMetric::Coherence: return r.coherence;
    case RatingMetric::Relevance: return r.relevance;
    case RatingMetric::Likes: return r.likes ? 1 : 0;
  }
  return 0;
}

/// CSV with header `meme_id,rater_id,coherence,relevance,likes`.
inline std::vector<RatingRecord> parse_ratings_csv(std::string_view text) {
  std::vector<RatingRecord> out;
  const auto lines = split(text, '\n');
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (collapse_whitespace(line).empty()) continue;
    const auto where = "line " + std::to_string(i + 1) + ": ";
    auto fields = split(line, ',');
    for (auto& f : fields) f = collapse_whitespace(f);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"meme_id", "rater_id", "coherence", "relevance", "likes"}) {
        throw Error(Errc::MalformedLine, where + "expected header meme_id,rater_id,coherence,relevance,likes");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) throw Error(Errc::MalformedLine, where + "expected 5 fields");
    const auto score = [&](const std::string& s, const char* name) {
      if (s.size() != 1 || s[0] < '1' || s[0] > '4') {
        throw Error(Errc::MalformedLine, where + name + " must be an integer 1-4, got '" + s + "'");
      }
      return s[0] - '0';
    };
    RatingRecord r;
    r.meme_id = fields[0];
    r.rater_id = fields[1];
    if (r.meme_id.empty()) throw Error(Errc::MalformedLine, where + "empty meme_id");
    r.coherence = score(fields[2], "coherence");
    r.relevance = score(fields[3], "relevance");
    if (fields[4] != "0" && fields[4] != "1") throw Error(Errc::MalformedLine, where + "likes must be 0 or 1");
    r.likes = fields[4] == "1";
    out.push_back(std::move(r));
  }
  if (!header_seen) throw Error(Errc::MalformedLine, "ratings file has no header");
  return out;
}

inline std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  return parse_ratings_csv(read_file(path));
}

/// Records grouped by meme id in first-seen order.
inline std::vector<std::pair<std::string, std::vector<RatingRecord>>> group_by_meme(
    const std::vector<RatingRecord>& records) {
  std::vector<std::pair<std::string, std::vector<RatingRecord>>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.meme_id, groups.size());
    if (inserted) groups.push_back({r.meme_id, {}});
    groups[it->second].second.push_back(r);
  }
  return groups;
}

inline void require_two_raters(const std::vector<std::pair<std::string, std::vector<RatingRecord>>>& groups) {
  for (const auto& [id, recs] : groups) {
    if (recs.size() != 2) {
      throw Error(Errc::IncompleteRatings,
                  "meme '" + id + "' has " + std::to_string(recs.size()) + " rating records, expected 2");
    }
  }
}

struct MemeScore {
  std::string meme_id;
  double coherence = 0.0;
  double relevance = 0.0;
};

struct RatingSummary {
  double coherence = 0.0;
  double relevance = 0.0;
  double user_likes = 0.0;
  std::size_t memes = 0;
  std::vector<MemeScore> per_meme;  // ordered by meme id
};

/// Per-meme score is the mean of its two raters; summary means are over
/// memes; user likes is liked records over all records.
inline RatingSummary aggregate_ratings(const std::vector<RatingRecord>& records) {
  auto groups = group_by_meme(records);
  require_two_raters(groups);
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  RatingSummary s;
  std::size_t liked = 0;
  for (const auto& [id, recs] : groups) {
    MemeScore m{id, (recs[0].coherence + recs[1].coherence) / 2.0, (recs[0].relevance + recs[1].relevance) / 2.0};
    s.coherence += m.coherence;
    s.relevance += m.relevance;
    for (const auto& r : recs) liked += r.likes ? 1 : 0;
    s.per_meme.push_back(std::move(m));
  }
  s.memes = groups.size();
  if (s.memes > 0) {
    s.coherence /= static_cast<double>(s.memes);
    s.relevance /= static_cast<double>(s.memes);
    s.user_likes = static_cast<double>(liked) / static_cast<double>(records.size());
  }
  return s;
}

struct ScoreHistogram {
  std::map<double, std::size_t> coherence;  // bucket lower edge -> meme count
  std::map<double, std::size_t> relevance;
};

/// Buckets of width 0.5 over each meme's averaged score. Memes with any
/// number of records are included.
inline ScoreHistogram score_distribution(const std::vector<RatingRecord>& records) {
  ScoreHistogram h;
  const auto bucket = [](double x) { return std::floor(x * 2.0) / 2.0; };
  for (const auto& [id, recs] : group_by_meme(records)) {
    double c = 0.0;
    double r = 0.0;
    for (const auto& rec : recs) {
      c += rec.coherence;
      r += rec.relevance;
    }
    ++h.coherence[bucket(c / static_cast<double>(recs.size()))];
    ++h.relevance[bucket(r / static_cast<double>(recs.size()))];
  }
  return h;
}

/// Rater pairs for kappa: per meme, (first record, second record).
inline std::vector<std::pair<int, int>> rating_pairs(const std::vector<RatingRecord>& records, RatingMetric metric) {
  const auto groups = group_by_meme(records);
  require_two_raters(groups);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [id, recs] : groups) pairs.emplace_back(metric_value(recs[0], metric), metric_value(recs[1], metric));
  return pairs;
}

}  // namespace memebot

#endif  // MEMEBOT_EVAL_RATINGS_HPP
