#pragma once

// Run configuration: a key = value text file plus command-line overrides.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "voxcue/features.hpp"
#include "voxcue/regression.hpp"

namespace voxcue {

struct RunConfig {
  double sample_rate = 11025.0;
  double f0_floor = 75.0;
  double f0_ceiling = 500.0;
  double pause_threshold = 0.400;  // s
  double voicing_threshold = 0.45;
  double stepwise_enter_p = 0.05;
  double stepwise_remove_p = 0.10;
  double max_absent_fraction = 0.10;
  double stability_fraction = 0.75;
  double stability_ratio = 0.75;
  std::vector<double> alpha_levels{0.01, 0.05};
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0 = hardware concurrency

  /// Sets one key; throws InvalidArgument for unknown keys or out-of-range values.
  void set(std::string_view key, std::string_view value);
  /// Applies "key=value".
  void apply_override(std::string_view assignment);
  /// Cross-field checks (floor < ceiling < Nyquist, enter <= remove).
  void validate() const;

  /// Resolved configuration in the same key = value format.
  std::string to_text() const;

  AnalysisParams analysis() const;
  StepwiseConfig stepwise() const;
  StabilityThresholds stability() const;

  static std::vector<std::string> keys();
};

/// Lines are "key = value"; '#' starts a comment. Validated after loading.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace voxcue
