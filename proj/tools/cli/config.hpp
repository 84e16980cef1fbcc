#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/smallgain.hpp"

namespace smallgain::cli {

/// Config problem located in the source document (1-based line/column; 0 when unknown).
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(const std::string& message, int line, int column)
      : ConfigError(format(message, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  }
  int line_;
  int column_;
};

/// External input for open-loop runs.
struct InputSpec {
  enum class Kind { constant, step, sine };
  Kind kind = Kind::constant;
  double value = 0.0;      ///< constant value, or the level before the step
  double after = 0.0;      ///< step level
  double at = 0.0;         ///< step time
  double amplitude = 0.0;  ///< sine: value + amplitude sin(omega t)
  double omega = 1.0;

  Signal sample(const SimConfig& config) const;
};

struct ValidationSettings {
  std::size_t runs = 10;
  double tol = 1e-5;
  double spread = 2e-5;
  double tail_fraction = kDefaultTailFraction;
};

struct GainCheckSettings {
  std::size_t inputs = 100;
  std::size_t pairs = 50;
  double slack = 0.02;
  double incremental_slack = 2e-4;
  std::optional<Interval> input_range;
  std::optional<GainFunction> claimed;
};

struct RunConfig {
  CascadeSpec cascade;
  SimConfig sim;
  GainMode mode = GainMode::global;
  CertifyOptions certify;
  std::optional<InputSpec> input;
  std::optional<std::vector<double>> histories;
  ValidationSettings validation;
  GainCheckSettings gain_check;
  std::optional<std::string> output_dir;
  std::uint64_t seed = 1;
  /// FNV-1a 64 of the document text, hex.
  std::string digest;
};

/// Parses a YAML run configuration. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Parses a gain such as `{ linear: 0.75 }` or `{ composed: [{ power_law: { coeff: 1, exponent: 2 } }, { linear: 3 }] }`.
GainFunction parse_gain(const std::string& text);

std::string fnv1a_hex(const std::string& text);

}  // namespace smallgain::cli
