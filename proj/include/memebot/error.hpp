#ifndef MEMEBOT_ERROR_HPP
#define MEMEBOT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace memebot {

enum class Errc {
  MalformedLine,
  UnknownTemplate,
  BadRatios,
  LengthMismatch,
  InvalidId,
  NonFinite,
  ShapeMismatch,
  EmptyBatch,
  EmptyInput,
  EmptyTrainSet,
  VariantMismatch,
  PrefixTooLong,
  VersionMismatch,
  CorruptFile,
  EmptyCorpus,
  IncompleteRatings,
  BoxOutOfBounds,
  MissingImage,
  WriteFailure,
  ConfigError,
  IoError,
  MalformedFile,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::BadRatios: return "BadRatios";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidId: return "InvalidId";
    case Errc::NonFinite: return "NonFinite";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyTrainSet: return "EmptyTrainSet";
    case Errc::VariantMismatch: return "VariantMismatch";
    case Errc::PrefixTooLong: return "PrefixTooLong";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::IncompleteRatings: return "IncompleteRatings";
    case Errc::BoxOutOfBounds: return "BoxOutOfBounds";
    case Errc::MissingImage: return "MissingImage";
    case Errc::WriteFailure: return "WriteFailure";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::MalformedFile: return "MalformedFile";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace memebot

#endif  // MEMEBOT_ERROR_HPP
