// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spectro.hpp
 * @brief Echo-shape synthesis for the nearly degenerate doublet and its
 *        Fourier spectrum.
 *
 * Conventions:
 *  - trace s(t_n) = sum_k a_k exp(+i 2 pi f_k (t_n - t_c)) env(t_n - t_c),
 *    t_n = n dt, t_c the envelope centre (mid-trace by default).
 *  - Gaussian envelope exp(-(pi G t)^2 / (4 ln 2)) is the Fourier conjugate of
 *    a spectral Gaussian of FWHM G; its time-domain FWHM is 8 ln2 / (2 pi G).
 *    The Lorentzian option uses exp(-pi G |t|).
 *  - X_m = dt * sum_n s_n exp(-i 2 pi m n / M) over the zero-padded trace of
 *    length M = next power of two >= N * zero_pad. A tone exp(+i 2 pi f t)
 *    therefore appears at +f. The axis is centred: f_m = m / (M dt) for
 *    m = -M/2 .. M/2 - 1, and sum |s|^2 dt = sum |X|^2 df exactly.
 */

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace bispin {

enum class LineShape { Gaussian, Lorentzian };

std::string to_string(LineShape s);
LineShape parse_line_shape(const std::string& name);

struct DoubletModel {
  std::array<double, 2> offsets{0.0, 0.0};     // Hz from the excitation frequency
  std::array<double, 2> amplitudes{1.0, 1.0};
  double linewidth_fwhm = 300e3;               // Hz
  double excitation_freq = 7.0805e9;           // Hz, metadata
  LineShape shape = LineShape::Gaussian;

  void validate() const;
};

struct EchoTrace {
  double dt = 0;
  std::vector<double> inphase;
  std::vector<double> quadrature;

  std::size_t size() const { return inphase.size(); }
};

/// CPMG train (pi/2 - (tau - pi - tau) x n). Echoes are identical here, so
/// summing the train only multiplies the amplitude by n.
struct CpmgSequence {
  double tau = 60e-6;
  int n_echoes = 5;
};

EchoTrace sum_echo_train(const EchoTrace& single, const CpmgSequence& sequence);

/// Requires duration / dt >= 64 samples.
EchoTrace synthesize_echo(const DoubletModel& model, double duration, double dt,
                          std::optional<double> envelope_center = std::nullopt);

struct Peak {
  double center = 0;  // Hz
  double fwhm = 0;    // Hz
  double height = 0;
};

struct Spectrum {
  std::vector<double> freq_axis;  // Hz offsets, uniform, ascending
  std::vector<double> amplitude;  // |X|
  std::vector<Peak> peaks;        // local maxima, sorted by center

  double df() const { return freq_axis.size() > 1 ? freq_axis[1] - freq_axis[0] : 0.0; }
};

/// Relative floor below which local maxima are ignored.
inline constexpr double kPeakFloor = 1e-3;

Spectrum spectrum_from_echo(const EchoTrace& trace, int zero_pad_factor);

/// Local maxima above floor * max, with parabolic centres and half-maximum widths.
std::vector<Peak> find_peaks(const std::vector<double>& freq_axis, const std::vector<double>& amplitude,
                             double floor = kPeakFloor);

/// Two-line least-squares fit of the magnitude spectrum, centres ascending.
std::array<Peak, 2> fit_doublet(const Spectrum& spectrum, LineShape shape = LineShape::Gaussian);

}  // namespace bispin
