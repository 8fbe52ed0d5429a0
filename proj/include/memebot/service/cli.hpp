#ifndef MEMEBOT_SERVICE_CLI_HPP
#define MEMEBOT_SERVICE_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memebot/catalog.hpp"
#include "memebot/compositor/font.hpp"
#include "memebot/corpus.hpp"
#include "memebot/error.hpp"
#include "memebot/eval/bleu.hpp"
#include "memebot/eval/kappa.hpp"
#include "memebot/eval/ratings.hpp"
#include "memebot/generation/pipeline.hpp"
#include "memebot/models/checkpoint.hpp"
#include "memebot/models/training.hpp"
#include "memebot/service/server.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

namespace memebot::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kUnknownTemplate = 4 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::BadRatios:
    case Errc::VariantMismatch:
      return kConfig;
    case Errc::UnknownTemplate:
      return kUnknownTemplate;
    case Errc::MalformedLine:
    case Errc::MalformedFile:
    case Errc::IoError:
    case Errc::CorruptFile:
    case Errc::VersionMismatch:
    case Errc::EmptyCorpus:
    case Errc::EmptyTrainSet:
    case Errc::IncompleteRatings:
    case Errc::LengthMismatch:
    case Errc::MissingImage:
      return kData;
    default:
      return kFailure;
  }
}

/// File locations shared by the subcommands. Empty paths fall back to the
/// data root (MEMEBOT_DATA_DIR or the build-time default).
struct Paths {
  std::string catalog;
  std::string tags;
  std::string sentiment;
  std::string font;
  std::string checkpoints = "checkpoints";

  static std::filesystem::path or_default(const std::string& given, const std::filesystem::path& fallback) {
    return given.empty() ? fallback : std::filesystem::path(given);
  }
  std::filesystem::path catalog_path() const { return or_default(catalog, data_dir() / "catalog.json"); }
  std::filesystem::path tags_path() const { return or_default(tags, data_dir() / "lexicon" / "tags.tsv"); }
  std::filesystem::path sentiment_path() const {
    return or_default(sentiment, data_dir() / "lexicon" / "sentiment.tsv");
  }
  std::filesystem::path font_path() const { return or_default(font, data_dir() / "font" / "memebot5x7.mbf"); }
  std::filesystem::path selector_path() const { return std::filesystem::path(checkpoints) / "selector.mbck"; }
  std::filesystem::path generator_path() const { return std::filesystem::path(checkpoints) / "generator.mbck"; }
};

inline TrainConfig load_config(const std::string& path) {
  try {
    return TrainConfig::load(path);
  } catch (const Error& e) {
    if (e.code() == Errc::IoError) throw Error(Errc::ConfigError, e.detail());
    throw;
  }
}

/// Shared pieces of both training commands.
struct TrainInputs {
  TemplateCatalog catalog;
  TrainConfig config;
  CorpusSplit split;
  Vocabulary vocab;
};

inline TrainInputs load_train_inputs(const Paths& paths, const std::string& config_path, const std::string& data) {
  auto cfg = load_config(config_path);
  auto catalog = TemplateCatalog::load(paths.catalog_path());
  auto samples = load_corpus(data, catalog);
  if (samples.empty()) throw Error(Errc::EmptyCorpus, data + " holds no captions");
  auto split = split_corpus(std::move(samples), SplitRatios{}, cfg.seed);
  auto vocab = build_vocab(split.train, catalog, cfg.min_freq);
  return {std::move(catalog), cfg, std::move(split), std::move(vocab)};
}

inline double best_val_loss(const TrainReport& r) {
  if (r.best_epoch == 0 || r.best_epoch > r.epochs.size()) return 0.0;
  return r.epochs[r.best_epoch - 1].val_loss;
}

inline void print_epoch(std::ostream& err, const EpochStats& s) {
  err << "epoch " << s.epoch << " train_loss " << s.train_loss << " val_loss " << s.val_loss << " train_acc "
      << s.train_accuracy << " val_acc " << s.val_accuracy << '\n';
}

inline int train_selector_cmd(const Paths& paths, const std::string& config_path, const std::string& data,
                              const std::string& out_dir, bool quiet, std::ostream& out, std::ostream& err) {
  auto in = load_train_inputs(paths, config_path, data);
  auto result = train_selector(in.split, in.vocab, in.catalog.size(), in.config, [&](const EpochStats& s) {
    if (!quiet) print_epoch(err, s);
    return true;
  });
  std::filesystem::create_directories(out_dir);
  const auto ckpt = std::filesystem::path(out_dir) / "selector.mbck";
  CheckpointMeta meta;
  meta.seed = in.config.seed;
  meta.step = result.report.steps;
  meta.loss = best_val_loss(result.report);
  save_checkpoint(result.model, in.vocab, template_names(in.catalog), meta, ckpt);
  result.report.checkpoint_path = ckpt.string();
  const auto report = result.report.to_json();
  write_file(std::filesystem::path(out_dir) / "selector_report.json", report.dump(2) + "\n");
  out << report.dump() << '\n';
  return kOk;
}

inline int train_generator_cmd(const Paths& paths, const std::string& config_path, const std::string& data,
                               const std::string& out_dir, bool quiet, std::ostream& out, std::ostream& err) {
  auto in = load_train_inputs(paths, config_path, data);
  const auto tags = TagLexicon::load(paths.tags_path());
  auto result = train_generator(in.split, in.vocab, tags, in.config, [&](const EpochStats& s) {
    if (!quiet) print_epoch(err, s);
    return true;
  });
  std::filesystem::create_directories(out_dir);
  const auto ckpt = std::filesystem::path(out_dir) / "generator.mbck";
  CheckpointMeta meta;
  meta.seed = in.config.seed;
  meta.step = result.report.steps;
  meta.loss = best_val_loss(result.report);
  meta.np_plus_v = in.config.np_plus_v;
  save_checkpoint(result.model, in.vocab, template_names(in.catalog), meta, ckpt);
  result.report.checkpoint_path = ckpt.string();
  const auto report = result.report.to_json();
  write_file(std::filesystem::path(out_dir) / "generator_report.json", report.dump(2) + "\n");
  out << report.dump() << '\n';
  return kOk;
}

struct GenerateOptions {
  std::string sentence;
  std::string template_name;
  std::size_t beam = 6;
  double alpha = 0.7;
  std::uint64_t seed = 0;
  std::string output = "meme.png";
};

inline int generate_cmd(const Paths& paths, const GenerateOptions& o, std::ostream& out) {
  const auto catalog = TemplateCatalog::load(paths.catalog_path());
  DecodeParams params;
  params.beam_size = o.beam;
  params.alpha = o.alpha;
  params.validate();
  if (!o.template_name.empty() && to_lower(o.template_name) != "auto") {
    params.forced_template = catalog.require(o.template_name);
  }
  std::optional<LoadedSelector> selector;
  if (!params.forced_template || std::filesystem::exists(paths.selector_path())) {
    selector.emplace(load_selector(paths.selector_path()));
    check_templates(selector->templates, catalog);
  }
  const auto generator = load_generator(paths.generator_path());
  check_templates(generator.templates, catalog);
  const auto tags = TagLexicon::load(paths.tags_path());
  const auto font = BitmapFont::load(paths.font_path());
  const MemePipeline pipe{catalog, selector ? &*selector : nullptr, generator, tags, font};
  const auto meme = generate_meme(o.sentence, pipe, params, o.seed);
  save_png(meme.image, o.output);
  nlohmann::json top = nlohmann::json::array();
  for (std::size_t i = 0; i < meme.ranking.size() && i < 5; ++i) {
    top.push_back({{"template", catalog[meme.ranking[i].template_id].name},
                   {"probability", meme.ranking[i].probability}});
  }
  out << nlohmann::json{{"template", meme.template_name},
                        {"probability", meme.probability},
                        {"forced", params.forced_template.has_value()},
                        {"top_k", top},
                        {"caption", meme.caption},
                        {"score", meme.score},
                        {"image_variant", meme.image_index},
                        {"output", o.output}}
             .dump()
      << '\n';
  return kOk;
}

/// One sentence per line, tokenized like captions.
inline std::vector<Sentence> read_sentences(const std::string& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && collapse_whitespace(lines.back()).empty()) lines.pop_back();
  std::vector<Sentence> out;
  for (const auto& l : lines) out.push_back(tokenize(l));
  return out;
}

inline int eval_bleu_cmd(const std::string& hyp, const std::string& ref, bool strict, std::ostream& out) {
  BleuOptions opt;
  opt.smoothing = !strict;
  const auto r = bleu(read_sentences(hyp), read_sentences(ref), opt);
  out << nlohmann::json{{"bleu_1", r.bleu[0]}, {"bleu_2", r.bleu[1]}, {"bleu_3", r.bleu[2]},
                        {"bleu_4", r.bleu[3]}, {"bp", r.brevity_penalty}, {"hyp_length", r.hyp_length},
                        {"ref_length", r.ref_length}, {"sentences", r.sentences}}
             .dump()
      << '\n';
  return kOk;
}

inline int eval_kappa_cmd(const std::string& ratings, const std::string& metric, std::ostream& out,
                          std::ostream& err) {
  const auto m = parse_rating_metric(metric);
  const auto k = cohen_kappa(rating_pairs(load_ratings(ratings), m));
  if (k.degenerate) err << "warning: chance agreement is 1 (both raters constant); kappa reported as 1\n";
  out << nlohmann::json{{"metric", to_lower(metric)}, {"kappa", k.kappa}, {"p_o", k.p_o},
                        {"p_e", k.p_e}, {"n", k.n}, {"degenerate", k.degenerate}}
             .dump()
      << '\n';
  return kOk;
}

inline int eval_ratings_cmd(const std::string& ratings, std::ostream& out) {
  const auto records = load_ratings(ratings);
  const auto s = aggregate_ratings(records);
  const auto h = score_distribution(records);
  const auto hist = [](const std::map<double, std::size_t>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) {
      char key[16];
      std::snprintf(key, sizeof key, "%.1f", k);
      j[key] = v;
    }
    return j;
  };
  out << nlohmann::json{{"coherence", s.coherence},
                        {"relevance", s.relevance},
                        {"user_likes", s.user_likes},
                        {"memes", s.memes},
                        {"distribution", {{"coherence", hist(h.coherence)}, {"relevance", hist(h.relevance)}}}}
             .dump()
      << '\n';
  return kOk;
}

inline int corpus_stats_cmd(const Paths& paths, const std::string& data, std::ostream& out) {
  const auto catalog = TemplateCatalog::load(paths.catalog_path());
  const auto samples = load_corpus(data, catalog);
  const auto counts = corpus_stats(samples, catalog);
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t i = 0; i < counts.size(); ++i) per[catalog[i].name] = counts[i];
  const auto sizes = split_sizes(samples.size(), SplitRatios{});
  out << nlohmann::json{{"captions", samples.size()},
                        {"templates", per},
                        {"split", {{"train", sizes[0]}, {"validation", sizes[1]}, {"test", sizes[2]}}}}
             .dump()
      << '\n';
  return kOk;
}

inline int filter_sentences_cmd(const Paths& paths, const std::string& input, std::ostream& out) {
  const auto lexicon = SentimentLexicon::load(paths.sentiment_path());
  std::vector<std::string> sentences;
  for (auto& l : read_lines(input)) {
    if (!collapse_whitespace(l).empty()) sentences.push_back(l);
  }
  for (const auto& s : filter_non_negative(sentences, lexicon)) out << s << '\n';
  return kOk;
}

inline int serve_cmd(const Paths& paths, const std::string& host, int port, const std::string& static_dir,
                     std::ostream& err) {
  ServiceOptions opts;
  opts.static_dir = static_dir;
  MemeService service(TemplateCatalog::load(paths.catalog_path()), load_selector(paths.selector_path()),
                      load_generator(paths.generator_path()), TagLexicon::load(paths.tags_path()),
                      BitmapFont::load(paths.font_path()), opts);
  httplib::Server server;
  service.install(server);
  err << "listening on http://" << host << ":" << port << '\n';
  if (!server.listen(host, port)) {
    err << "error: cannot listen on " << host << ":" << port << '\n';
    return kFailure;
  }
  return kOk;
}

/// Entry point of the `memebot` executable.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"memebot: sentence-to-meme generation"};
  app.require_subcommand(1);
  Paths paths;
  app.add_option("--catalog", paths.catalog, "template catalog JSON");
  app.add_option("--tags", paths.tags, "part-of-speech lexicon TSV");
  app.add_option("--sentiment", paths.sentiment, "sentiment lexicon TSV");
  app.add_option("--font", paths.font, "MBF1 bitmap font");
  app.add_option("--checkpoints", paths.checkpoints, "directory holding selector.mbck and generator.mbck");

  std::string config, data, out_dir = "checkpoints";
  bool quiet = false;
  auto* train_sel = app.add_subcommand("train-selector", "train the template selector");
  auto* train_gen = app.add_subcommand("train-generator", "train the caption generator");
  for (auto* sub : {train_sel, train_gen}) {
    sub->add_option("--config", config, "training config JSON")->required();
    sub->add_option("--data", data, "corpus JSONL")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--quiet", quiet, "no per-epoch log");
  }

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "generate one meme");
  generate->add_option("sentence", gen.sentence, "input sentence")->required();
  generate->add_option("--template", gen.template_name, "force a template by name");
  generate->add_option("--beam", gen.beam, "beam size")->check(CLI::PositiveNumber);
  generate->add_option("--alpha", gen.alpha, "length-penalty exponent")->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", gen.seed, "seed for the image-variant draw");
  generate->add_option("-o,--output", gen.output, "output PNG");

  std::string hyp, ref, ratings, metric = "coherence";
  bool strict = false;
  auto* ebleu = app.add_subcommand("eval-bleu", "corpus BLEU-1..4");
  ebleu->add_option("--hyp", hyp, "hypotheses, one per line")->required();
  ebleu->add_option("--ref", ref, "references, one per line")->required();
  ebleu->add_flag("--strict", strict, "disable smoothing");
  auto* ekappa = app.add_subcommand("eval-kappa", "Cohen's kappa between the two raters");
  ekappa->add_option("--ratings", ratings, "ratings CSV")->required();
  ekappa->add_option("--metric", metric, "coherence | relevance | likes");
  auto* eratings = app.add_subcommand("eval-ratings", "aggregate human ratings");
  eratings->add_option("--ratings", ratings, "ratings CSV")->required();

  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port")->check(CLI::Range(1, 65535));
  serve->add_option("--static-dir", static_dir, "directory for ?format=url images");

  auto* stats = app.add_subcommand("corpus-stats", "per-template counts and split sizes");
  stats->add_option("--data", data, "corpus JSONL")->required();
  std::string input;
  auto* filter = app.add_subcommand("filter-sentences", "keep sentences with non-negative sentiment");
  filter->add_option("--input", input, "one sentence per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*train_sel) return train_selector_cmd(paths, config, data, out_dir, quiet, out, err);
    if (*train_gen) return train_generator_cmd(paths, config, data, out_dir, quiet, out, err);
    if (*generate) return generate_cmd(paths, gen, out);
    if (*ebleu) return eval_bleu_cmd(hyp, ref, strict, out);
    if (*ekappa) return eval_kappa_cmd(ratings, metric, out, err);
    if (*eratings) return eval_ratings_cmd(ratings, out);
    if (*serve) return serve_cmd(paths, host, port, static_dir, err);
    if (*stats) return corpus_stats_cmd(paths, data, out);
    if (*filter) return filter_sentences_cmd(paths, input, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kConfig;
}

}  // namespace memebot::cli

#endif  // MEMEBOT_SERVICE_CLI_HPP
