// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file echo_model.hpp
 * @brief Closed-form echo amplitudes of the allowed/forbidden pair under an
 *        elliptically polarized two-resonator drive, phase sweeps and fitting.
 *
 * Per spin i with CPW field B_C = scale * |b1_i| and dielectric field B_D at
 * relative phase phi, the circular components are
 *     B_cw  = 1/2 sqrt(B_D^2 + B_C^2 + 2 B_D B_C cos phi)
 *     B_ccw = 1/2 sqrt(B_D^2 + B_C^2 - 2 B_D B_C cos phi)
 * and the echo contribution of a transition driven by component B_s is
 *     E = B_C sin^3(g mu_B tau_pi B_s / (2 hbar)).
 * The ensemble signal is the weight-summed contribution of every sample.
 */

#pragma once

#include "bispin/fieldmap.hpp"
#include "bispin/spin_core.hpp"
#include "bispin/transitions.hpp"

#include <span>
#include <string>
#include <vector>

namespace bispin {

struct DriveConfig {
  double b1_dielectric = 1.786e-4;  // T
  double b1_cpw_scale = 1.374e-2;   // A of drive; multiplies the T/A field map
  double phase_phi = 0.0;           // rad
  double tau_pi = 100e-9;           // s
  double g_drive = 2.0003;

  void validate() const;
};

struct CircularPair {
  double clockwise = 0;
  double counterclockwise = 0;

  double component(Sense s) const { return s == Sense::Clockwise ? clockwise : counterclockwise; }
};

CircularPair circular_components(double b1_d, double b1_cpw, double phi);

/// Rotation-angle argument g mu_B tau_pi b / (2 hbar).
double rabi_argument(const DriveConfig& drive, const PhysicalConstants& constants, double b_sigma);

double single_spin_echo(const DriveConfig& drive, const PhysicalConstants& constants,
                        double b1_cpw_i, double b_sigma);

/// Which circular sense drives the allowed transition; the forbidden one
/// takes the other.
struct Pairing {
  Sense allowed = Sense::CounterClockwise;

  Sense forbidden() const { return opposite(allowed); }
  Pairing swapped() const { return {opposite(allowed)}; }

  /// From the dominant helicity of the allowed transition's matrix elements.
  static Pairing from_allowed(const TransitionData& allowed);
};

/// Optional per-transition scaling of the Rabi argument (1 = bare g-factor).
struct RabiWeights {
  double allowed = 1.0;
  double forbidden = 1.0;
};

struct EchoPair {
  double e_forbidden = 0;
  double e_allowed = 0;
  bool normalized = false;

  /// Scaled so that e_forbidden + e_allowed = 1 (0.5/0.5 when both vanish).
  EchoPair normalized_pair() const;
};

EchoPair ensemble_echo(std::span<const FieldSample> samples, const DriveConfig& drive,
                       Pairing pairing, const PhysicalConstants& constants = {},
                       RabiWeights weights = {});

enum class Normalization { None, PerPoint, Global };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& name);

struct SweepPoint {
  double phi = 0;
  EchoPair echo;
};

/**
 * ensemble_echo at every phase (drive_base.phase_phi is replaced).
 * PerPoint scales each pair to unit sum; Global divides every pair by the
 * sweep mean of e_forbidden + e_allowed.
 */
std::vector<SweepPoint> phase_sweep(std::span<const FieldSample> samples, const DriveConfig& drive_base,
                                    std::span<const double> phases, Normalization normalization,
                                    Pairing pairing, const PhysicalConstants& constants = {},
                                    RabiWeights weights = {});

/// n phases evenly covering [0, 2 pi], both ends included.
std::vector<double> phase_grid(int n);

struct PhaseDatum {
  double phi = 0;
  double e_forbidden = 0;
  double e_allowed = 0;
};

struct FitParams {
  double b1_dielectric = 0;
  double b1_cpw_scale = 0;
  double phase_offset = 0;  // model is evaluated at phi - phase_offset
  double residual_sse = 0;
};

struct FitFixed {
  double tau_pi = 100e-9;
  double g_drive = 2.0003;
};

struct FitResult {
  FitParams params;
  double initial_sse = 0;
  bool improved = false;
  /// Jacobian rank-deficient at the solution or contrast-free data.
  bool degenerate = false;
  bool converged = false;
  int evaluations = 0;
  /// Lowest SSE among starts that ended at a different minimum (+inf if all
  /// agreed). Close to params.residual_sse means the data cannot tell B_D
  /// from B_C.
  double alternate_sse = 0;
  std::vector<double> residuals_forbidden;
  std::vector<double> residuals_allowed;
};

/**
 * Least-squares fit of per-point normalized curves over (b1_dielectric,
 * b1_cpw_scale, phase_offset). Never returns parameters worse than `init`;
 * when no improvement is found `improved` is false and init is returned.
 * Descends from `init` and from starts that split the same total amplitude
 * differently between B_D and B_C, and keeps the lowest minimum.
 */
FitResult fit_phase_dependence(std::span<const PhaseDatum> data, std::span<const FieldSample> samples,
                               const FitFixed& fixed, const FitParams& init, Pairing pairing,
                               const PhysicalConstants& constants = {}, RabiWeights weights = {});

/// Model curve for a parameter set, per-point normalized.
std::vector<PhaseDatum> model_curve(std::span<const double> phases, std::span<const FieldSample> samples,
                                    const FitFixed& fixed, const FitParams& params, Pairing pairing,
                                    const PhysicalConstants& constants = {}, RabiWeights weights = {});

}  // namespace bispin
