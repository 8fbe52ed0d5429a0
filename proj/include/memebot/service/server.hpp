#ifndef MEMEBOT_SERVICE_SERVER_HPP
#define MEMEBOT_SERVICE_SERVER_HPP

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include <httplib.h>
#include <json.hpp>

#include "memebot/catalog.hpp"
#include "memebot/compositor/font.hpp"
#include "memebot/compositor/image.hpp"
#include "memebot/error.hpp"
#include "memebot/generation/pipeline.hpp"
#include "memebot/models/checkpoint.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

namespace memebot {

inline std::string base64_encode(std::string_view bytes) { return httplib::detail::base64_encode(std::string(bytes)); }

struct ServiceOptions {
  std::size_t top_k = 5;
  std::size_t max_beam = 64;
  std::filesystem::path static_dir;  // target of ?format=url; empty disables it
};

/// Reply produced by a handler before it is written to the socket.
struct ApiReply {
  int status = 200;
  nlohmann::json body;
  std::string content_type = "application/json";
  std::string raw;  // non-JSON payload (images)
};

inline ApiReply api_error(int status, std::string_view code, std::string_view detail) {
  return {status, {{"error", code}, {"detail", detail}}, "application/json", {}};
}

/// Parsed POST /generate body.
struct GenerateRequest {
  std::string sentence;
  std::optional<std::string> template_name;  // absent or "auto" lets the selector choose
  DecodeParams params;
  std::uint64_t seed = 0;
};

/// Loaded models and lookup tables behind the HTTP API. Immutable after
/// construction; handlers may run concurrently.
class MemeService {
 public:
  MemeService(TemplateCatalog catalog, LoadedSelector selector, LoadedGenerator generator, TagLexicon tags,
              BitmapFont font, ServiceOptions options = {})
      : catalog_(std::move(catalog)),
        selector_(std::move(selector)),
        generator_(std::move(generator)),
        tags_(std::move(tags)),
        font_(std::move(font)),
        options_(std::move(options)) {
    check_templates(selector_.templates, catalog_);
    check_templates(generator_.templates, catalog_);
    if (generator_.vocab.num_templates() != catalog_.size()) {
      throw Error(Errc::ConfigError, "generator vocabulary does not cover the catalog");
    }
  }

  const TemplateCatalog& catalog() const { return catalog_; }

  ApiReply health() const { return {200, {{"status", "ok"}}, "application/json", {}}; }

  ApiReply templates() const {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
      list.push_back({{"id", i},
                      {"name", catalog_[i].name},
                      {"thumbnail_url", "/templates/" + std::to_string(i) + "/image"},
                      {"variants", catalog_[i].image_paths.size()}});
    }
    return {200, {{"templates", list}}, "application/json", {}};
  }

  ApiReply template_image(const std::string& index) const {
    std::size_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoul(index, &used);
      if (used != index.size()) throw std::invalid_argument(index);
    } catch (const std::exception&) {
      return api_error(404, "UnknownTemplate", "no template with id '" + index + "'");
    }
    if (id >= catalog_.size()) return api_error(404, "UnknownTemplate", "no template with id " + index);
    try {
      return {200, nullptr, "image/png", read_file(catalog_[id].image_paths.front())};
    } catch (const Error& e) {
      return api_error(500, "MissingImage", e.detail());
    }
  }

  /// Validates a /generate body. On failure the reply holds the 4xx answer.
  std::variant<GenerateRequest, ApiReply> parse_request(std::string_view body) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return api_error(400, "MalformedJson", e.what());
    }
    if (!j.is_object()) return api_error(400, "MalformedJson", "request body must be a JSON object");
    GenerateRequest req;
    if (!j.contains("sentence") || !j["sentence"].is_string()) {
      return api_error(400, "EmptyInput", "field 'sentence' must be a string");
    }
    req.sentence = j["sentence"].get<std::string>();
    if (split_whitespace(req.sentence).empty()) return api_error(400, "EmptyInput", "sentence is empty");
    if (j.contains("template") && !j["template"].is_null()) {
      if (!j["template"].is_string()) return api_error(400, "BadRequest", "field 'template' must be a string");
      const auto name = j["template"].get<std::string>();
      if (!name.empty() && to_lower(name) != "auto") req.template_name = name;
    }
    if (j.contains("beam_size") && !j["beam_size"].is_null()) {
      if (!j["beam_size"].is_number_integer() || j["beam_size"].get<long long>() < 1 ||
          j["beam_size"].get<long long>() > static_cast<long long>(options_.max_beam)) {
        return api_error(400, "BadRequest",
                         "beam_size must be an integer in 1.." + std::to_string(options_.max_beam));
      }
      req.params.beam_size = j["beam_size"].get<std::size_t>();
    }
    if (j.contains("alpha") && !j["alpha"].is_null()) {
      if (!j["alpha"].is_number() || !(j["alpha"].get<double>() >= 0.0)) {
        return api_error(400, "BadRequest", "alpha must be a number >= 0");
      }
      req.params.alpha = j["alpha"].get<double>();
    }
    if (j.contains("seed") && !j["seed"].is_null()) {
      if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) {
        return api_error(400, "BadRequest", "seed must be a non-negative integer");
      }
      req.seed = j["seed"].get<std::uint64_t>();
    }
    if (req.template_name) {
      const auto id = catalog_.find(*req.template_name);
      if (!id) return api_error(422, "UnknownTemplate", "unknown template '" + *req.template_name + "'");
      req.params.forced_template = *id;
    }
    return req;
  }

  GeneratedMeme run(const GenerateRequest& req) const {
    const MemePipeline pipe{catalog_, &selector_, generator_, tags_, font_};
    return generate_meme(req.sentence, pipe, req.params, req.seed);
  }

  /// POST /generate. `as_url` writes the PNG under the static directory and
  /// returns its URL instead of inline base64.
  ApiReply generate(std::string_view body, bool as_url) const {
    const auto t0 = std::chrono::steady_clock::now();
    auto parsed = parse_request(body);
    if (auto* reply = std::get_if<ApiReply>(&parsed)) return *reply;
    const auto& req = std::get<GenerateRequest>(parsed);
    if (as_url && options_.static_dir.empty()) {
      return api_error(400, "BadRequest", "format=url needs the server to run with a static directory");
    }
    GeneratedMeme meme;
    try {
      meme = run(req);
    } catch (const Error& e) {
      if (e.code() == Errc::EmptyInput) return api_error(400, "EmptyInput", e.detail());
      if (e.code() == Errc::UnknownTemplate) return api_error(422, "UnknownTemplate", e.detail());
      return api_error(500, errc_name(e.code()), e.detail());
    }
    const auto png = encode_png(meme.image);
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < meme.ranking.size() && i < options_.top_k; ++i) {
      top.push_back({{"template", catalog_[meme.ranking[i].template_id].name},
                     {"probability", meme.ranking[i].probability}});
    }
    nlohmann::json out = {{"template", meme.template_name},
                          {"probability", meme.probability},
                          {"forced", req.params.forced_template.has_value()},
                          {"top_k", top},
                          {"caption", meme.caption},
                          {"score", meme.score},
                          {"seed", req.seed},
                          {"image_variant", meme.image_index}};
    if (as_url) {
      char name[32];
      std::snprintf(name, sizeof name, "%016llx.png", static_cast<unsigned long long>(fnv1a64(png)));
      try {
        write_file(options_.static_dir / name, png);
      } catch (const Error& e) {
        return api_error(500, "WriteFailure", e.detail());
      }
      out["image_url"] = std::string("/static/") + name;
    } else {
      out["image"] = base64_encode(png);
    }
    out["latency_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {200, std::move(out), "application/json", {}};
  }

  /// Registers every route on `server`.
  void install(httplib::Server& server) const {
    const auto send = [](httplib::Response& res, const ApiReply& r) {
      res.status = r.status;
      if (r.content_type == "application/json") {
        res.set_content(r.body.dump(), "application/json");
      } else {
        res.set_content(r.raw, r.content_type);
      }
    };
    server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Get("/templates",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, templates()); });
    server.Get(R"(/templates/([^/]+)/image)", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, template_image(req.matches[1]));
    });
    server.Post("/generate", [this, send](const httplib::Request& req, httplib::Response& res) {
      const bool as_url = req.has_param("format") && req.get_param_value("format") == "url";
      send(res, generate(req.body, as_url));
    });
    if (!options_.static_dir.empty()) {
      std::filesystem::create_directories(options_.static_dir);
      server.set_mount_point("/static", options_.static_dir.string());
    }
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send(res, api_error(500, "Internal", what));
    });
    server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, api_error(res.status, res.status == 404 ? "NotFound" : "HttpError", "request failed"));
    });
  }

 private:
  TemplateCatalog catalog_;
  LoadedSelector selector_;
  LoadedGenerator generator_;
  TagLexicon tags_;
  BitmapFont font_;
  ServiceOptions options_;
};

}  // namespace memebot

#endif  // MEMEBOT_SERVICE_SERVER_HPP
