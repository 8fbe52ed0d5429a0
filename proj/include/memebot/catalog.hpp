#ifndef MEMEBOT_CATALOG_HPP
#define MEMEBOT_CATALOG_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "memebot/error.hpp"
#include "memebot/util.hpp"

namespace memebot {

using TemplateId = std::size_t;

struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Box&) const = default;
};

enum class CaptionPosition { Top, Bottom };

struct CatalogEntry {
  std::string name;
  std::string token;  // reserved vocabulary token, e.g. "<success_kid>"
  std::vector<std::filesystem::path> image_paths;
  std::optional<Box> caption_box;  // absent: a band derived from `position`
  CaptionPosition position = CaptionPosition::Top;
};

/// One (template, caption) training pair.
struct MemeSample {
  TemplateId template_id = 0;
  std::string caption;

  bool operator==(const MemeSample&) const = default;
};

/// Key used for name lookups: case-insensitive, whitespace-collapsed.
inline std::string template_key(std::string_view name) {
  return to_lower(collapse_whitespace(name));
}

inline std::string template_token_for(std::string_view name) {
  std::string slug;
  for (char c : to_lower(name)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug.push_back(c);
    } else if (!slug.empty() && slug.back() != '_') {
      slug.push_back('_');
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  return "<" + slug + ">";
}

class TemplateCatalog {
 public:
  TemplateCatalog() = default;

  explicit TemplateCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
      throw Error(Errc::ConfigError, "catalog needs at least 2 templates");
    }
    std::map<std::string, std::size_t> tokens;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      auto& e = entries_[i];
      if (e.token.empty()) e.token = template_token_for(e.name);
      if (e.image_paths.empty()) {
        throw Error(Errc::ConfigError, "template '" + e.name + "' has no images");
      }
      if (!by_key_.emplace(template_key(e.name), i).second) {
        throw Error(Errc::ConfigError, "duplicate template name '" + e.name + "'");
      }
      if (!tokens.emplace(e.token, i).second) {
        throw Error(Errc::ConfigError, "duplicate template token '" + e.token + "'");
      }
    }
  }

  std::size_t size() const { return entries_.size(); }
  const CatalogEntry& operator[](TemplateId id) const { return entries_.at(id); }
  const std::vector<CatalogEntry>& entries() const { return entries_; }

  std::optional<TemplateId> find(std::string_view name) const {
    auto it = by_key_.find(template_key(name));
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

  TemplateId require(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error(Errc::UnknownTemplate, "unknown template '" + std::string(name) + "'");
  }

  /// Parses the catalog JSON. Relative image paths resolve against `base_dir`.
  static TemplateCatalog from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array()) {
      throw Error(Errc::ConfigError, "catalog must be an object with a 'templates' array");
    }
    std::vector<CatalogEntry> entries;
    for (const auto& t : doc["templates"]) {
      CatalogEntry e;
      try {
        e.name = t.at("name").get<std::string>();
        for (const auto& img : t.at("images")) {
          std::filesystem::path p = img.get<std::string>();
          e.image_paths.push_back(p.is_absolute() ? p : base_dir / p);
        }
        if (t.contains("caption_box")) {
          const auto& b = t["caption_box"];
          e.caption_box = Box{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(),
                              b.at("h").get<int>()};
        }
        if (t.contains("position")) {
          const auto pos = t["position"].get<std::string>();
          if (pos == "top") {
            e.position = CaptionPosition::Top;
          } else if (pos == "bottom") {
            e.position = CaptionPosition::Bottom;
          } else {
            throw Error(Errc::ConfigError, "position must be 'top' or 'bottom'");
          }
        }
        if (t.contains("token")) e.token = t["token"].get<std::string>();
      } catch (const nlohmann::json::exception& ex) {
        throw Error(Errc::ConfigError, std::string("bad catalog entry: ") + ex.what());
      }
      entries.push_back(std::move(e));
    }
    return TemplateCatalog(std::move(entries));
  }

  static TemplateCatalog load(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(Errc::ConfigError, path.string() + ": " + ex.what());
    }
    return from_json(doc, path.parent_path());
  }

 private:
  std::vector<CatalogEntry> entries_;
  std::map<std::string, TemplateId> by_key_;
};

}  // namespace memebot

#endif  // MEMEBOT_CATALOG_HPP
