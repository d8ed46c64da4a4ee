#pragma once

#include <stdexcept>
#include <string>

namespace glime {

enum class errc {
  // dataset / ingestion
  missing_value,
  duplicate_column,
  unknown_column,
  empty_dataset,
  too_few_rows,
  bad_fraction,
  target_not_binary,
  width_mismatch,
  length_mismatch,
  // predictor
  single_class,
  spawn_failure,
  handshake_timeout,
  malformed_response,
  external_protocol,
  // perturbation / covariance
  zero_width,
  degenerate_column,
  too_few_samples,
  // solver / network
  not_pd,
  select_failure,
  non_positive_diagonal,
  singular_system,
  // stability / explanation
  item_mismatch,
  observation_mismatch,
  inconsistent_components,
  // environment
  io_error,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_value: return "MissingValue";
    case errc::duplicate_column: return "DuplicateColumn";
    case errc::unknown_column: return "UnknownColumn";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::too_few_rows: return "TooFewRows";
    case errc::bad_fraction: return "BadFraction";
    case errc::target_not_binary: return "TargetNotBinary";
    case errc::width_mismatch: return "WidthMismatch";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::single_class: return "SingleClass";
    case errc::spawn_failure: return "SpawnFailure";
    case errc::handshake_timeout: return "HandshakeTimeout";
    case errc::malformed_response: return "MalformedResponse";
    case errc::external_protocol: return "ExternalProtocolError";
    case errc::zero_width: return "ZeroWidth";
    case errc::degenerate_column: return "DegenerateColumn";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::not_pd: return "NotPD";
    case errc::select_failure: return "SelectFailure";
    case errc::non_positive_diagonal: return "NonPositiveDiagonal";
    case errc::singular_system: return "SingularSystem";
    case errc::item_mismatch: return "ItemMismatch";
    case errc::observation_mismatch: return "ObservationMismatch";
    case errc::inconsistent_components: return "InconsistentComponents";
    case errc::io_error: return "IoError";
    case errc::config_error: return "ConfigError";
  }
  return "Unknown";
}

// Coarse bucket used by the CLI for its one-line diagnostics.
inline const char* errc_category(errc c) {
  switch (c) {
    case errc::unknown_column:
    case errc::bad_fraction:
    case errc::zero_width:
    case errc::config_error:
      return "config";
    case errc::io_error:
      return "io";
    case errc::missing_value:
    case errc::duplicate_column:
    case errc::empty_dataset:
    case errc::too_few_rows:
    case errc::target_not_binary:
    case errc::width_mismatch:
    case errc::length_mismatch:
    case errc::degenerate_column:
    case errc::too_few_samples:
      return "data";
    case errc::single_class:
    case errc::spawn_failure:
    case errc::handshake_timeout:
    case errc::malformed_response:
    case errc::external_protocol:
      return "predictor";
    case errc::not_pd:
    case errc::select_failure:
    case errc::non_positive_diagonal:
    case errc::singular_system:
      return "solver";
    case errc::item_mismatch:
    case errc::observation_mismatch:
    case errc::inconsistent_components:
      return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  errc code() const noexcept { return code_; }
  const char* category() const noexcept { return errc_category(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace glime
