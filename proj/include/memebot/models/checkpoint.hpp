#ifndef MEMEBOT_MODELS_CHECKPOINT_HPP
#define MEMEBOT_MODELS_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/models/generator.hpp"
#include "memebot/models/selector.hpp"
#include "memebot/models/transformer.hpp"
#include "memebot/neural/tensor.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

namespace memebot {

// Layout (all integers little-endian):
//   "MBCK" | u32 version | u32 header_len | header JSON (UTF-8)
//   then per tensor: u16 name_len | name | u8 rank | u32 dims[rank] | f32 data
// The header records the tensor count, so a file cut at a tensor boundary
// is still detected as corrupt.

inline constexpr char kCheckpointMagic[4] = {'M', 'B', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double loss = 0.0;
  bool np_plus_v = true;  // generator input corruption mode
};

/// Decoded checkpoint before it is bound to a model.
struct RawCheckpoint {
  nlohmann::json header;
  std::vector<std::pair<std::string, nn::Tensor>> tensors;
};

namespace detail {

inline void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }
inline void put_u16(std::string& out, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(Errc::CorruptFile, "checkpoint truncated at byte " + std::to_string(pos_));
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t uint(std::size_t width) {
    auto s = take(width);
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(nlohmann::json header, const nn::NamedParameters& params) {
  header["num_tensors"] = params.size();
  const std::string head = header.dump();
  std::string out(kCheckpointMagic, 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(head.size()));
  out += head;
  for (const auto& [name, var] : params) {
    const auto& t = var->value;
    if (name.size() > 0xffff || t.rank() > 0xff) throw Error(Errc::WriteFailure, "tensor name or rank too large");
    detail::put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    detail::put_u8(out, static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.shape()) detail::put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : t.vec()) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

inline RawCheckpoint decode_checkpoint(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw Error(Errc::CorruptFile, "bad checkpoint magic");
  }
  in.take(4);
  const auto version = in.uint(4);
  if (version != kCheckpointVersion) {
    throw Error(Errc::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                           std::to_string(kCheckpointVersion));
  }
  const auto header_len = in.uint(4);
  RawCheckpoint ck;
  try {
    ck.header = nlohmann::json::parse(in.take(header_len));
  } catch (const nlohmann::json::parse_error&) {
    throw Error(Errc::CorruptFile, "checkpoint header is not valid JSON");
  }
  if (!ck.header.is_object() || !ck.header.contains("num_tensors")) {
    throw Error(Errc::CorruptFile, "checkpoint header lacks num_tensors");
  }
  const auto count = ck.header["num_tensors"].get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    const auto name_len = in.uint(2);
    std::string name(in.take(name_len));
    const auto rank = in.uint(1);
    nn::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.uint(4));
    const std::size_t n = nn::shape_numel(shape);
    auto raw = in.take(n * 4);
    std::vector<float> data(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[j * 4 + b])) << (8 * b);
      data[j] = std::bit_cast<float>(bits);
    }
    ck.tensors.emplace_back(std::move(name), nn::Tensor(std::move(shape), std::move(data)));
  }
  if (!in.done()) throw Error(Errc::CorruptFile, "trailing bytes after the last tensor");
  return ck;
}

/// Copies checkpoint tensors into `params`; names, order and shapes must match.
inline void bind_tensors(const RawCheckpoint& ck, const nn::NamedParameters& params) {
  if (ck.tensors.size() != params.size()) {
    throw Error(Errc::CorruptFile, "checkpoint has " + std::to_string(ck.tensors.size()) + " tensors, model expects " +
                                       std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = ck.tensors[i];
    if (name != params[i].first || tensor.shape() != params[i].second->value.shape()) {
      throw Error(Errc::CorruptFile, "tensor '" + name + "' " + nn::shape_str(tensor.shape()) + " does not match '" +
                                         params[i].first + "' " + nn::shape_str(params[i].second->value.shape()));
    }
    params[i].second->value = tensor;
  }
}

inline nlohmann::json meta_json(const CheckpointMeta& m) {
  return {{"seed", m.seed}, {"step", m.step}, {"loss", m.loss}, {"np_plus_v", m.np_plus_v}};
}

inline CheckpointMeta meta_from_json(const nlohmann::json& j) {
  CheckpointMeta m;
  if (!j.is_object()) return m;
  m.seed = j.value("seed", std::uint64_t{0});
  m.step = j.value("step", std::uint64_t{0});
  m.loss = j.value("loss", 0.0);
  m.np_plus_v = j.value("np_plus_v", true);
  return m;
}

inline std::vector<std::string> template_names(const TemplateCatalog& catalog) {
  std::vector<std::string> names;
  for (const auto& e : catalog.entries()) names.push_back(e.name);
  return names;
}

template <typename Model>
nlohmann::json checkpoint_header(std::string_view kind, const Model& model, const Vocabulary& vocab,
                                 const std::vector<std::string>& templates, const CheckpointMeta& meta) {
  return {{"kind", kind},
          {"config", model.config().to_json()},
          {"templates", templates},
          {"vocab", vocab.tokens()},
          {"meta", meta_json(meta)}};
}

struct LoadedGenerator {
  CaptionGenerator model;
  Vocabulary vocab;
  std::vector<std::string> templates;
  CheckpointMeta meta;
};

struct LoadedSelector {
  TemplateSelector model;
  Vocabulary vocab;
  std::vector<std::string> templates;
  CheckpointMeta meta;
};

inline std::string encode_generator(const CaptionGenerator& model, const Vocabulary& vocab,
                                    const std::vector<std::string>& templates, const CheckpointMeta& meta) {
  auto header = checkpoint_header("generator", model, vocab, templates, meta);
  header["variant"] = variant_name(model.variant());
  return encode_checkpoint(std::move(header), model.parameters());
}

inline std::string encode_selector(const TemplateSelector& model, const Vocabulary& vocab,
                                   const std::vector<std::string>& templates, const CheckpointMeta& meta) {
  auto header = checkpoint_header("selector", model, vocab, templates, meta);
  header["num_templates"] = model.num_templates();
  return encode_checkpoint(std::move(header), model.parameters());
}

namespace detail {
inline void require_kind(const nlohmann::json& header, std::string_view kind) {
  if (header.value("kind", std::string{}) != kind) {
    throw Error(Errc::CorruptFile, "checkpoint is not a " + std::string(kind));
  }
}

template <typename T>
T header_field(const nlohmann::json& header, const char* key) {
  try {
    return header.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::CorruptFile, std::string("checkpoint header field '") + key + "' missing or invalid");
  }
}
}  // namespace detail

inline LoadedGenerator decode_generator(std::string_view bytes) {
  auto ck = decode_checkpoint(bytes);
  detail::require_kind(ck.header, "generator");
  const auto config = ModelConfig::from_json(detail::header_field<nlohmann::json>(ck.header, "config"));
  const auto variant = parse_variant(detail::header_field<std::string>(ck.header, "variant"));
  Vocabulary vocab(detail::header_field<std::vector<std::string>>(ck.header, "vocab"));
  if (vocab.size() != config.vocab_size) throw Error(Errc::CorruptFile, "vocabulary size disagrees with config");
  CaptionGenerator model(variant, config, 0);
  bind_tensors(ck, model.parameters());
  return {std::move(model), std::move(vocab), detail::header_field<std::vector<std::string>>(ck.header, "templates"),
          meta_from_json(ck.header.value("meta", nlohmann::json::object()))};
}

inline LoadedSelector decode_selector(std::string_view bytes) {
  auto ck = decode_checkpoint(bytes);
  detail::require_kind(ck.header, "selector");
  const auto config = ModelConfig::from_json(detail::header_field<nlohmann::json>(ck.header, "config"));
  Vocabulary vocab(detail::header_field<std::vector<std::string>>(ck.header, "vocab"));
  if (vocab.size() != config.vocab_size) throw Error(Errc::CorruptFile, "vocabulary size disagrees with config");
  TemplateSelector model(config, detail::header_field<std::size_t>(ck.header, "num_templates"), 0);
  bind_tensors(ck, model.parameters());
  return {std::move(model), std::move(vocab), detail::header_field<std::vector<std::string>>(ck.header, "templates"),
          meta_from_json(ck.header.value("meta", nlohmann::json::object()))};
}

inline void save_checkpoint(const CaptionGenerator& model, const Vocabulary& vocab,
                            const std::vector<std::string>& templates, const CheckpointMeta& meta,
                            const std::filesystem::path& path) {
  write_file(path, encode_generator(model, vocab, templates, meta));
}

inline void save_checkpoint(const TemplateSelector& model, const Vocabulary& vocab,
                            const std::vector<std::string>& templates, const CheckpointMeta& meta,
                            const std::filesystem::path& path) {
  write_file(path, encode_selector(model, vocab, templates, meta));
}

inline LoadedGenerator load_generator(const std::filesystem::path& path) { return decode_generator(read_file(path)); }
inline LoadedSelector load_selector(const std::filesystem::path& path) { return decode_selector(read_file(path)); }

/// The checkpoint must have been trained against this catalog, in order.
inline void check_templates(const std::vector<std::string>& stored, const TemplateCatalog& catalog) {
  if (stored.size() != catalog.size()) {
    throw Error(Errc::ConfigError, "checkpoint has " + std::to_string(stored.size()) + " templates, catalog has " +
                                       std::to_string(catalog.size()));
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (template_key(stored[i]) != template_key(catalog[i].name)) {
      throw Error(Errc::ConfigError, "template " + std::to_string(i) + " is '" + stored[i] + "' in the checkpoint but '" +
                                         catalog[i].name + "' in the catalog");
    }
  }
}

}  // namespace memebot

#endif  // MEMEBOT_MODELS_CHECKPOINT_HPP
