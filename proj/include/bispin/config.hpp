// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief Run configuration: INI-style sections of `key = value` lines.
 *
 * Frequencies are in Hz, fields in T, lengths in m, times in s. Lines
 * starting with '#' or ';' are comments. Unknown sections or keys are
 * rejected. Every key is optional and defaults to the values below.
 *
 *   [spin]       electron_spin nuclear_spin hyperfine_A g_electron
 *                gyromag_nuclear bohr_magneton planck_h
 *   [geometry]   center_width gap_width ground_width film_thickness
 *                drive_current current_profile filaments_per_strip
 *   [implant]    strip_width strip_length depth_min depth_max
 *                lateral_center gap n_lateral n_depth
 *   [drive]      b1_dielectric b1_cpw_scale phase tau_pi g_drive
 *                rabi_weighting
 *   [experiment] excitation_freq field window min_mel linewidth line_shape
 *                trace_duration trace_dt zero_pad cpmg_tau cpmg_echoes
 *                normalization
 *   [output]     dir
 */

#pragma once

#include "bispin/echo_model.hpp"
#include "bispin/fieldmap.hpp"
#include "bispin/spectro.hpp"
#include "bispin/spin_core.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace bispin {

struct IniDocument {
  std::map<std::string, std::map<std::string, std::string>> sections;
};

/// Throws DataError naming `source` and the line number on syntax errors.
IniDocument parse_ini(std::istream& in, const std::string& source = "<config>");

struct ExperimentConfig {
  double excitation_freq = 7.0805e9;
  double field_B0 = 0.05019;
  double window = 5e6;
  double min_mel = 0.01;
  double linewidth = 300e3;
  LineShape line_shape = LineShape::Gaussian;
  double trace_duration = 20e-6;
  double trace_dt = 50e-9;
  int zero_pad = 8;
  CpmgSequence cpmg;
  Normalization normalization = Normalization::PerPoint;
};

struct RunConfig {
  SpinSystem spin;
  CPWGeometry geometry;
  ImplantRegion implant;
  int n_lateral = 32;
  int n_depth = 8;
  DriveConfig drive;
  /// Weight each transition's Rabi argument by its dominant circular matrix
  /// element instead of using the bare g-factor.
  bool rabi_weighting = false;
  ExperimentConfig experiment;
  std::filesystem::path output_dir = ".";

  /// Cross-section consistency checks; throws DataError.
  void validate() const;
};

/// Builds a config from a parsed document; throws DataError on unknown keys
/// or unparsable values.
RunConfig config_from_ini(const IniDocument& doc);

RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parsing it back yields the same configuration.
std::string format_config(const RunConfig& config);

}  // namespace bispin
