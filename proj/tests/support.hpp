#ifndef MEMEBOT_TESTS_SUPPORT_HPP
#define MEMEBOT_TESTS_SUPPORT_HPP

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <unistd.h>

#include "memebot/memebot.hpp"

namespace memebot::testing {

/// Directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("memebot_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Code of the memebot::Error thrown by `f`, or nullopt when it returns.
template <typename F>
std::optional<Errc> error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline TemplateCatalog desk_catalog() { return TemplateCatalog::load(data_dir() / "catalog.json"); }
inline TemplateCatalog full_catalog() { return TemplateCatalog::load(data_dir() / "catalog_full.json"); }
inline TagLexicon desk_tags() { return TagLexicon::load(data_dir() / "lexicon" / "tags.tsv"); }

/// Catalog of `n` templates named T0..T{n-1}, all pointing at one shipped image.
inline TemplateCatalog toy_catalog(std::size_t n) {
  std::vector<CatalogEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    CatalogEntry e;
    e.name = "T" + std::to_string(i);
    e.image_paths = {data_dir() / "templates" / "success_kid_0.png"};
    entries.push_back(std::move(e));
  }
  return TemplateCatalog(std::move(entries));
}

/// Small-model training settings for overfit tests: no dropout, flat-ish lr.
inline TrainConfig tiny_config(Variant variant, std::size_t epochs) {
  TrainConfig c;
  c.variant = variant;
  c.layers = 1;
  c.d_model = 32;
  c.d_ff = 64;
  c.heads = 2;
  c.p_drop = 0.0;
  c.lr = 3e-3;
  c.eta_min = 1e-4;
  c.t0 = 100000;
  c.t_mult = 1.0;
  c.batch_size = 4;
  c.epochs = epochs;
  c.seed = 7;
  return c;
}

}  // namespace memebot::testing

#endif  // MEMEBOT_TESTS_SUPPORT_HPP
