// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/transitions.hpp"

#include "bispin/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bispin {

namespace {

double frequency_in(const LabeledEigenSystem& eig, const TransitionSpec& t) {
  const double f = eig.energy(t.upper) - eig.energy(t.lower);
  if (f < 0) {
    throw InvalidArgument("transition " + t.to_string() + ": upper level lies below lower level");
  }
  return f;
}

void check_spec(const TransitionSpec& t) {
  if (t.upper == t.lower) throw InvalidArgument("transition labels must be distinct");
}

double element(const CVector& bra, const CMatrix& op, const CVector& ket) {
  return std::abs(bra.dot(op * ket));
}

TransitionData data_in(const LabeledEigenSystem& eig, const SpinOperatorSet& ops,
                       const TransitionSpec& t) {
  const CVector& up = eig.state(t.upper);
  const CVector& lo = eig.state(t.lower);
  TransitionData d;
  d.frequency = frequency_in(eig, t);
  d.mel_sigma_plus = element(lo, ops.S_plus, up);
  d.mel_sigma_minus = element(lo, ops.S_minus, up);
  d.mel_linear_x = element(lo, ops.Sx, up);
  return d;
}

}  // namespace

Sense sense_of(Helicity h) {
  const bool plus = h == Helicity::SigmaPlus;
  return plus == kSigmaPlusIsClockwise ? Sense::Clockwise : Sense::CounterClockwise;
}

Sense opposite(Sense s) {
  return s == Sense::Clockwise ? Sense::CounterClockwise : Sense::Clockwise;
}

std::string to_string(Helicity h) { return h == Helicity::SigmaPlus ? "sigma+" : "sigma-"; }
std::string to_string(Sense s) { return s == Sense::Clockwise ? "clockwise" : "counterclockwise"; }

std::string TransitionSpec::to_string() const {
  return upper.to_string() + "<->" + lower.to_string();
}

TransitionSpec allowed_clock_transition() { return {{5, -1}, {4, -2}}; }
TransitionSpec forbidden_clock_transition() { return {{5, -2}, {4, -1}}; }

TransitionSpec stretched_transition(const SpinSystem& system) {
  const double f = system.electron_spin + system.nuclear_spin;
  return {{f, f}, {f - 1.0, f - 1.0}};
}

double TransitionData::selectivity() const {
  const double hi = std::max(mel_sigma_plus, mel_sigma_minus);
  const double lo = std::min(mel_sigma_plus, mel_sigma_minus);
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double transition_frequency(const SpinSystem& system, double B0, const TransitionSpec& t) {
  check_spec(t);
  return frequency_in(solve_labeled(system, B0), t);
}

double transition_gradient(const SpinSystem& system, double B0, const TransitionSpec& t,
                           double step) {
  if (!(step > 0)) throw InvalidArgument("transition_gradient: step must be positive");
  if (!(B0 > step)) {
    throw InvalidArgument("transition_gradient: B0 must exceed the finite-difference step");
  }
  check_spec(t);
  auto f = [&](double b) { return transition_frequency(system, b, t); };
  const double coarse = (f(B0 + step) - f(B0 - step)) / (2.0 * step);
  const double h = 0.5 * step;
  const double fine = (f(B0 + h) - f(B0 - h)) / (2.0 * h);

  // Smooth levels give |coarse - fine| ~ f''' h^2, many orders below this.
  const double tolerance = 1e-3 * std::abs(fine) + 1e-6 * system.electron_zeeman();
  if (std::abs(coarse - fine) > tolerance) {
    std::ostringstream msg;
    msg << "transition_gradient: inconsistent finite differences at B0 = " << B0 << " T ("
        << coarse << " vs " << fine << " Hz/T); the step may straddle a label change";
    throw NumericalError(msg.str());
  }
  return (4.0 * fine - coarse) / 3.0;
}

ClockTransition find_clock_field(const SpinSystem& system, const TransitionSpec& t, double b_low,
                                 double b_high) {
  if (!(b_low > kDefaultGradientStep) || !(b_high > b_low)) {
    throw InvalidArgument("find_clock_field: bracket must satisfy step < b_low < b_high");
  }
  auto gradient = [&](double b) { return transition_gradient(system, b, t); };
  const double g_low = gradient(b_low);
  const double g_high = gradient(b_high);
  if (g_low == 0.0 || g_high == 0.0 || (g_low > 0) == (g_high > 0)) {
    if (g_low == 0.0 || g_high == 0.0) {
      const double b = g_low == 0.0 ? b_low : b_high;
      return {b, transition_frequency(system, b, t), 0.0, t};
    }
    std::ostringstream msg;
    msg << "find_clock_field: df/dB does not change sign over [" << b_low << ", " << b_high
        << "] T (df/dB = " << g_low << " and " << g_high << " Hz/T)";
    throw NumericalError(msg.str());
  }

  std::uintmax_t iterations = 60;
  const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-7; };
  const auto [lo, hi] = boost::math::tools::toms748_solve(gradient, b_low, b_high, g_low, g_high,
                                                          tol, iterations);
  if (!tol(lo, hi)) {
    throw NumericalError("find_clock_field: root bracket did not shrink below 0.1 uT in 60 iterations");
  }
  const double b_ct = 0.5 * (lo + hi);
  const double d = 10.0 * kDefaultGradientStep;
  const double curvature = (gradient(b_ct + d) - gradient(b_ct - d)) / (2.0 * d);
  if (!(std::abs(curvature) > 0)) {
    throw NumericalError("find_clock_field: zero curvature at the root, not an extremum");
  }
  return {b_ct, transition_frequency(system, b_ct, t), curvature, t};
}

TransitionData matrix_elements(const SpinSystem& system, double B0, const TransitionSpec& t) {
  check_spec(t);
  const LabeledEigenSystem eig = solve_labeled(system, B0);
  TransitionData d = data_in(eig, build_operators(system), t);
  d.df_dB = transition_gradient(system, B0, t);
  return d;
}

std::vector<TransitionEntry> list_transitions(const SpinSystem& system, double B0, double f_center,
                                              double f_window, double min_mel) {
  if (!(f_window > 0)) throw InvalidArgument("list_transitions: window must be positive");
  if (!(B0 >= 0)) throw InvalidArgument("list_transitions: B0 must be non-negative");
  const double field = B0 > 0 ? B0 : kZeroFieldLabelingB0;
  const LabeledEigenSystem eig = solve_labeled(system, field);
  const SpinOperatorSet ops = build_operators(system);
  const TransitionSpec stretched = stretched_transition(system);
  const double reference =
      element(eig.state(stretched.lower), ops.Sx, eig.state(stretched.upper));

  std::vector<TransitionEntry> out;
  for (std::size_t lo = 0; lo < eig.size(); ++lo) {
    for (std::size_t up = lo + 1; up < eig.size(); ++up) {
      const double f = eig.energies[up] - eig.energies[lo];
      if (std::abs(f - f_center) > f_window) continue;
      const double mel_x = element(eig.states[lo], ops.Sx, eig.states[up]);
      if (mel_x < min_mel * reference) continue;
      const TransitionSpec spec{eig.labels[up], eig.labels[lo]};
      TransitionData d = data_in(eig, ops, spec);
      d.df_dB = field > kDefaultGradientStep ? transition_gradient(system, field, spec)
                                             : std::numeric_limits<double>::quiet_NaN();
      out.push_back({spec, d});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TransitionEntry& a, const TransitionEntry& b) {
    return a.data.frequency < b.data.frequency;
  });
  return out;
}

}  // namespace bispin
