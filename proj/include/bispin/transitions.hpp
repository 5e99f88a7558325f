// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file transitions.hpp
 * @brief Transition frequencies, field sensitivities, clock points and
 *        circular-polarization matrix elements.
 *
 * Circular matrix elements are reported as
 *     mel_sigma_plus  = |<lower| S+ |upper>| = |<upper| S- |lower>|
 *     mel_sigma_minus = |<lower| S- |upper>| = |<upper| S+ |lower>|
 * so a transition whose upper state has mF one unit *below* the lower state
 * couples through sigma+ and vice versa. kSigmaPlusIsClockwise maps these to
 * the clockwise / counterclockwise senses of the drive field. Flipping it is
 * observationally equivalent for the echo model, which only consumes which
 * sense belongs to which transition.
 */

#pragma once

#include "bispin/spin_core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace bispin {

enum class Helicity { SigmaPlus, SigmaMinus };
enum class Sense { Clockwise, CounterClockwise };

inline constexpr bool kSigmaPlusIsClockwise = true;

Sense sense_of(Helicity h);
Sense opposite(Sense s);
std::string to_string(Helicity h);
std::string to_string(Sense s);

struct TransitionSpec {
  StateLabel upper;
  StateLabel lower;

  bool operator==(const TransitionSpec&) const = default;
  std::string to_string() const;
};

/// |5,-1> <-> |4,-2>, conventionally "allowed".
TransitionSpec allowed_clock_transition();
/// |5,-2> <-> |4,-1>, conventionally "forbidden" (nuclear flip at high field).
TransitionSpec forbidden_clock_transition();
/// |I+S, I+S> <-> |I+S-1, I+S-1>; pure Delta mF = +1 for any field.
TransitionSpec stretched_transition(const SpinSystem& system);

struct TransitionData {
  double frequency = 0;        // Hz
  double df_dB = 0;            // Hz/T
  double mel_sigma_plus = 0;
  double mel_sigma_minus = 0;
  double mel_linear_x = 0;     // |<lower| Sx |upper>|

  Helicity dominant() const {
    return mel_sigma_plus >= mel_sigma_minus ? Helicity::SigmaPlus : Helicity::SigmaMinus;
  }
  /// max/min of the circular elements; +inf when one vanishes exactly.
  double selectivity() const;
  /// df/dB signed by the helicity, i.e. the effective gyromagnetic ratio with
  /// the precession sense folded in.
  double oriented_gyromagnetic_ratio() const {
    return dominant() == Helicity::SigmaPlus ? df_dB : -df_dB;
  }
};

struct ClockTransition {
  double field_Bct = 0;      // T
  double frequency_fct = 0;  // Hz
  double curvature = 0;      // Hz/T^2 at the clock field
  TransitionSpec transition;
};

inline constexpr double kDefaultGradientStep = 10e-6;  // T

/// E_upper - E_lower in Hz. Throws InvalidArgument for unknown labels or if
/// the upper label lies below the lower one.
double transition_frequency(const SpinSystem& system, double B0, const TransitionSpec& t);

/**
 * Central difference with step h, refined by one Richardson step using h/2.
 * Requires B0 > step. If the two estimates disagree beyond what smooth
 * levels allow the step is assumed to straddle a label change and a
 * NumericalError is raised.
 */
double transition_gradient(const SpinSystem& system, double B0, const TransitionSpec& t,
                           double step = kDefaultGradientStep);

/// Locates df/dB = 0 inside [b_low, b_high] to better than 1 uT.
ClockTransition find_clock_field(const SpinSystem& system, const TransitionSpec& t, double b_low,
                                 double b_high);

TransitionData matrix_elements(const SpinSystem& system, double B0, const TransitionSpec& t);

struct TransitionEntry {
  TransitionSpec spec;
  TransitionData data;
};

inline constexpr double kDefaultMinMel = 0.01;

/**
 * All level pairs whose frequency lies in [f_center - f_window, f_center + f_window]
 * and whose |<lower|Sx|upper>| is at least `min_mel` times the stretched
 * transition's element at the same field. Sorted by frequency. B0 = 0 is
 * evaluated at kZeroFieldLabelingB0.
 */
std::vector<TransitionEntry> list_transitions(const SpinSystem& system, double B0, double f_center,
                                              double f_window, double min_mel = kDefaultMinMel);

}  // namespace bispin
