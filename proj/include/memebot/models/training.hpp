#ifndef MEMEBOT_MODELS_TRAINING_HPP
#define MEMEBOT_MODELS_TRAINING_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memebot/corpus.hpp"
#include "memebot/error.hpp"
#include "memebot/models/generator.hpp"
#include "memebot/models/selector.hpp"
#include "memebot/models/transformer.hpp"
#include "memebot/neural/autograd.hpp"
#include "memebot/neural/optim.hpp"
#include "memebot/text.hpp"

namespace memebot {

/// Training configuration file contents. Defaults are the desk-scale setup.
struct TrainConfig {
  Variant variant = Variant::SMT2MC;
  std::size_t layers = 2;
  std::size_t d_model = 128;
  std::size_t d_ff = 512;
  std::size_t heads = 4;
  double p_drop = 0.1;
  double lr = 5e-4;
  double eta_min = 1e-5;
  std::uint64_t t0 = 500;
  double t_mult = 2.0;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  bool np_plus_v = true;
  std::size_t min_freq = 1;
  double clip_norm = 1.0;
  std::size_t max_len = 32;
  bool tie_embeddings = true;

  ModelConfig model(std::size_t vocab_size) const {
    ModelConfig c;
    c.layers = layers;
    c.d_model = d_model;
    c.d_ff = d_ff;
    c.heads = heads;
    c.p_drop = p_drop;
    c.vocab_size = vocab_size;
    c.max_len = max_len;
    c.tie_embeddings = tie_embeddings;
    return c;
  }

  nn::LrSchedule schedule() const { return {lr, eta_min, t0, t_mult}; }

  void validate() const {
    model(1).validate();
    schedule().validate();
    if (batch_size == 0) throw Error(Errc::ConfigError, "batch_size must be >= 1");
    if (min_freq == 0) throw Error(Errc::ConfigError, "min_freq must be >= 1");
    if (!(clip_norm > 0.0)) throw Error(Errc::ConfigError, "clip_norm must be positive");
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    if (!j.is_object()) throw Error(Errc::ConfigError, "training config must be a JSON object");
    try {
      if (j.contains("variant")) {
        const auto v = j["variant"].get<std::string>();
        if (to_upper(v) != "SELECTOR") c.variant = parse_variant(v);
      }
      c.layers = j.value("N", c.layers);
      c.d_model = j.value("d_model", c.d_model);
      c.d_ff = j.value("d_ff", c.d_ff);
      c.heads = j.value("h", c.heads);
      c.p_drop = j.value("P_drop", c.p_drop);
      c.lr = j.value("lr", c.lr);
      c.eta_min = j.value("eta_min", c.eta_min);
      c.t0 = j.value("T_0", c.t0);
      c.t_mult = j.value("T_mult", c.t_mult);
      c.batch_size = j.value("batch_size", c.batch_size);
      c.epochs = j.value("epochs", c.epochs);
      c.seed = j.value("seed", c.seed);
      c.np_plus_v = j.value("np_plus_v", c.np_plus_v);
      c.min_freq = j.value("min_freq", c.min_freq);
      c.clip_norm = j.value("clip_norm", c.clip_norm);
      c.max_len = j.value("max_len", c.max_len);
      c.tie_embeddings = j.value("tie_embeddings", c.tie_embeddings);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::ConfigError, std::string("training config: ") + ex.what());
    }
    c.validate();
    return c;
  }

  static TrainConfig load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(Errc::ConfigError, path.string() + ": " + ex.what());
    }
    return from_json(j);
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_accuracy = 0.0;  // selector: template accuracy; generator: teacher-forced token accuracy
  double val_accuracy = 0.0;
  double val_f1 = 0.0;          // selector only (macro F1)
};

struct TrainReport {
  std::string model;  // "selector" or the generator variant
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double wall_clock_seconds = 0.0;
  std::uint64_t steps = 0;
  std::string checkpoint_path;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : epochs) {
      rows.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_accuracy", e.val_accuracy},
                      {"val_f1", e.val_f1}});
    }
    return {{"model", model},          {"epochs", rows},
            {"best_epoch", best_epoch}, {"wall_clock_seconds", wall_clock_seconds},
            {"steps", steps},           {"checkpoint", checkpoint_path}};
  }
};

/// Macro-averaged F1 over `num_classes`; classes absent from both the gold
/// and predicted labels are skipped.
inline double macro_f1(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                       std::size_t num_classes) {
  std::vector<double> tp(num_classes), fp(num_classes), fn(num_classes);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == predicted[i]) {
      tp[gold[i]] += 1;
    } else {
      fp[predicted[i]] += 1;
      fn[gold[i]] += 1;
    }
  }
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (tp[c] + fp[c] + fn[c] == 0) continue;
    sum += 2 * tp[c] / (2 * tp[c] + fp[c] + fn[c]);
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

namespace detail {

inline std::vector<nn::Tensor> snapshot(const nn::NamedParameters& params) {
  std::vector<nn::Tensor> out;
  out.reserve(params.size());
  for (auto& [name, var] : params) out.push_back(var->value);
  return out;
}

inline void restore(const nn::NamedParameters& params, const std::vector<nn::Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].second->value = values[i];
}

/// Shared minibatch loop. `sample_loss(index, ctx, normalizer)` builds one
/// example's loss node already divided by the batch normalizer, which is the
/// sum of `weight_of(i)` over the batch. Returns the epoch's mean loss.
template <typename WeightFn, typename LossFn>
double run_epoch(std::size_t n, const TrainConfig& cfg, const nn::NamedParameters& params, nn::Adam& adam,
                 std::uint64_t& step, Rng& rng, WeightFn&& weight_of, LossFn&& sample_loss) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  const auto schedule = cfg.schedule();
  double loss_sum = 0.0, weight_sum = 0.0;
  nn::ForwardContext ctx{true, static_cast<float>(cfg.p_drop), &rng};
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t end = std::min(n, start + cfg.batch_size);
    double normalizer = 0.0;
    for (std::size_t b = start; b < end; ++b) normalizer += weight_of(order[b]);
    for (std::size_t b = start; b < end; ++b) {
      nn::Var loss = sample_loss(order[b], ctx, normalizer);
      const double v = loss->value[0];
      if (!std::isfinite(v)) throw Error(Errc::NonFinite, "training loss became non-finite");
      loss_sum += v * normalizer;
      nn::backward(loss);
    }
    weight_sum += normalizer;
    nn::clip_grad_norm(params, cfg.clip_norm);
    adam.step(params, nn::lr_at(step, schedule));
    ++step;
    nn::zero_grad(params);
  }
  return weight_sum > 0 ? loss_sum / weight_sum : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Template selector

struct SelectorMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

inline TokenSequence selector_input(const std::string& caption, const Vocabulary& vocab) {
  auto ids = vocab.encode(caption);
  if (ids.empty()) ids.push_back(Vocabulary::kUnk);
  return ids;
}

inline SelectorMetrics evaluate_selector(const TemplateSelector& model, const std::vector<MemeSample>& samples,
                                         const Vocabulary& vocab) {
  SelectorMetrics m;
  if (samples.empty()) return m;
  nn::NoGradGuard no_grad;
  std::vector<std::size_t> gold, pred;
  double loss = 0.0;
  for (const auto& s : samples) {
    auto logits = model.logits(selector_input(s.caption, vocab), nn::ForwardContext{});
    const auto ls = nn::log_softmax(logits->value.span());
    loss -= ls.at(s.template_id);
    std::size_t best = 0;
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (ls[i] > ls[best]) best = i;
    }
    gold.push_back(s.template_id);
    pred.push_back(best);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == pred[i];
  m.loss = loss / static_cast<double>(samples.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  m.f1 = macro_f1(gold, pred, model.num_templates());
  return m;
}

struct SelectorTrainResult {
  TemplateSelector model;
  TrainReport report;
};

/// Minimizes mean cross-entropy of P(T|S) with Adam + warm-restart cosine
/// schedule. The returned model holds the weights of the epoch with the
/// lowest validation loss (training loss when there is no validation set).
/// `on_epoch` may return false to stop early.
inline SelectorTrainResult train_selector(const CorpusSplit& split, const Vocabulary& vocab, std::size_t num_templates,
                                          const TrainConfig& cfg,
                                          const std::function<bool(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (split.train.empty()) throw Error(Errc::EmptyTrainSet, "selector training set is empty");
  for (const auto& s : split.train) {
    if (s.template_id >= num_templates) throw Error(Errc::UnknownTemplate, "sample template outside the catalog");
  }
  const auto t_start = std::chrono::steady_clock::now();
  TemplateSelector model(cfg.model(vocab.size()), num_templates, cfg.seed);
  const auto params = model.parameters();
  nn::Adam adam(0.9, 0.98, 1e-9);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uint64_t step = 0;

  std::vector<TokenSequence> inputs;
  for (const auto& s : split.train) inputs.push_back(selector_input(s.caption, vocab));

  TrainReport report;
  report.model = "selector";
  double best = std::numeric_limits<double>::infinity();
  std::vector<nn::Tensor> best_weights = detail::snapshot(params);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = detail::run_epoch(
        inputs.size(), cfg, params, adam, step, rng, [](std::size_t) { return 1.0; },
        [&](std::size_t i, const nn::ForwardContext& ctx, double normalizer) {
          auto logits = model.logits(inputs[i], ctx);
          const std::int32_t target = static_cast<std::int32_t>(split.train[i].template_id);
          return nn::cross_entropy(logits, std::span(&target, 1), -1, normalizer).loss;
        });
    const auto train_eval = evaluate_selector(model, split.train, vocab);
    stats.train_accuracy = train_eval.accuracy;
    if (!split.validation.empty()) {
      const auto val = evaluate_selector(model, split.validation, vocab);
      stats.val_loss = val.loss;
      stats.val_accuracy = val.accuracy;
      stats.val_f1 = val.f1;
    } else {
      stats.val_loss = train_eval.loss;
      stats.val_accuracy = train_eval.accuracy;
      stats.val_f1 = train_eval.f1;
    }
    report.epochs.push_back(stats);
    if (stats.val_loss < best) {
      best = stats.val_loss;
      report.best_epoch = epoch;
      best_weights = detail::snapshot(params);
    }
    if (on_epoch && !on_epoch(stats)) break;
  }
  detail::restore(params, best_weights);
  report.steps = step;
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Caption generator

/// One teacher-forcing example: encoder source, BOS+C decoder input and
/// C+EOS targets.
struct GeneratorExample {
  TokenSequence source;
  TokenSequence decoder_input;
  TokenSequence target;
};

/// Corrupts the caption into encoder content words (nouns, their adjective
/// run, and verbs when `np_plus_v`) and lays out the decoder sequences.
inline GeneratorExample make_generator_example(const MemeSample& sample, const Vocabulary& vocab,
                                               const TagLexicon& tags, Variant variant, bool np_plus_v,
                                               std::size_t max_len) {
  GeneratorExample ex;
  TokenSequence content;
  if (variant == Variant::SMT2MC) content = vocab.encode_tokens(content_words(sample.caption, tags, np_plus_v));
  ex.source = generator_source(sample.template_id, content, variant, vocab, max_len);
  auto caption = vocab.encode(sample.caption);
  if (caption.size() > max_len - 1) caption.resize(max_len - 1);
  ex.decoder_input.push_back(Vocabulary::kBos);
  ex.decoder_input.insert(ex.decoder_input.end(), caption.begin(), caption.end());
  ex.target = caption;
  ex.target.push_back(Vocabulary::kEos);
  return ex;
}

struct GeneratorMetrics {
  double loss = 0.0;            // mean token NLL
  double token_accuracy = 0.0;  // teacher-forced argmax accuracy
};

/// Evaluation-mode (no dropout) loss and teacher-forced accuracy.
inline GeneratorMetrics evaluate_generator(const CaptionGenerator& model, const std::vector<GeneratorExample>& examples) {
  GeneratorMetrics m;
  if (examples.empty()) return m;
  nn::NoGradGuard no_grad;
  const nn::ForwardContext ctx{};
  double nll = 0.0;
  std::size_t tokens = 0, correct = 0;
  for (const auto& ex : examples) {
    auto memory = model.encode(ex.source, ctx);
    auto logits = model.project(model.decode(ex.decoder_input, memory, ctx));
    auto r = nn::cross_entropy(logits, ex.target, Vocabulary::kPad);
    nll += r.nll_sum;
    tokens += r.count;
    correct += r.correct;
  }
  m.loss = nll / static_cast<double>(tokens);
  m.token_accuracy = static_cast<double>(correct) / static_cast<double>(tokens);
  return m;
}

struct GeneratorTrainResult {
  CaptionGenerator model;
  TrainReport report;
};

/// Teacher-forced maximum likelihood of C given (template, corrupted C).
/// Loss is the mean token NLL over each minibatch.
inline GeneratorTrainResult train_generator(const CorpusSplit& split, const Vocabulary& vocab, const TagLexicon& tags,
                                            const TrainConfig& cfg,
                                            const std::function<bool(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (split.train.empty()) throw Error(Errc::EmptyTrainSet, "generator training set is empty");
  const auto t_start = std::chrono::steady_clock::now();
  const auto mc = cfg.model(vocab.size());
  auto build = [&](const std::vector<MemeSample>& samples) {
    std::vector<GeneratorExample> out;
    for (const auto& s : samples) out.push_back(make_generator_example(s, vocab, tags, cfg.variant, cfg.np_plus_v, mc.max_len));
    return out;
  };
  const auto train = build(split.train);
  const auto val = build(split.validation);

  CaptionGenerator model(cfg.variant, mc, cfg.seed);
  const auto params = model.parameters();
  nn::Adam adam(0.9, 0.98, 1e-9);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uint64_t step = 0;

  TrainReport report;
  report.model = std::string(variant_name(cfg.variant));
  double best = std::numeric_limits<double>::infinity();
  std::vector<nn::Tensor> best_weights = detail::snapshot(params);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = detail::run_epoch(
        train.size(), cfg, params, adam, step, rng,
        [&](std::size_t i) { return static_cast<double>(train[i].target.size()); },
        [&](std::size_t i, const nn::ForwardContext& ctx, double normalizer) {
          const auto& ex = train[i];
          auto memory = model.encode(ex.source, ctx);
          auto logits = model.project(model.decode(ex.decoder_input, memory, ctx));
          return nn::cross_entropy(logits, ex.target, Vocabulary::kPad, normalizer).loss;
        });
    const auto train_eval = evaluate_generator(model, train);
    stats.train_accuracy = train_eval.token_accuracy;
    const auto val_eval = val.empty() ? train_eval : evaluate_generator(model, val);
    stats.val_loss = val_eval.loss;
    stats.val_accuracy = val_eval.token_accuracy;
    report.epochs.push_back(stats);
    if (stats.val_loss < best) {
      best = stats.val_loss;
      report.best_epoch = epoch;
      best_weights = detail::snapshot(params);
    }
    if (on_epoch && !on_epoch(stats)) break;
  }
  detail::restore(params, best_weights);
  report.steps = step;
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace memebot

#endif  // MEMEBOT_MODELS_TRAINING_HPP
