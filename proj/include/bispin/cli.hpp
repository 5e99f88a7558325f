// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file cli.hpp
 * @brief Experiment commands behind the `bispin` executable.
 *
 * Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
 * Commands compute everything before writing; on a nonzero exit no output
 * file is created or replaced.
 */

#pragma once

#include "bispin/config.hpp"
#include "bispin/error.hpp"
#include "bispin/transitions.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bispin {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Bad command-line values (ranges, counts).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
  std::string message;
};

CommandResult cmd_breit_rabi(const RunConfig& config, double b_min, double b_max, int n_points);
CommandResult cmd_transitions(const RunConfig& config, double B0);
CommandResult cmd_clock(const RunConfig& config, const TransitionSpec& transition, double b_low,
                        double b_high);
CommandResult cmd_fieldmap(const RunConfig& config);
CommandResult cmd_phase_sweep(const RunConfig& config, int n_phases, Normalization normalization);

struct FitInit {
  std::optional<double> b1_dielectric;
  std::optional<double> b1_cpw_scale;
  double phase_offset = 0.0;
};
CommandResult cmd_fit(const RunConfig& config, const std::filesystem::path& data_csv,
                      const FitInit& init = {});
CommandResult cmd_spectrum(const RunConfig& config, double B0);

/// Parses "F,mF" such as "5,-1".
StateLabel parse_label(const std::string& text);

/// Full command-line entry point (argv[0] included).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bispin
