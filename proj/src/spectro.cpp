// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/spectro.hpp"

#include "bispin/error.hpp"
#include "bispin/least_squares.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace bispin {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;

double envelope(LineShape shape, double fwhm, double t) {
  if (shape == LineShape::Gaussian) {
    const double x = kPi * fwhm * t;
    return std::exp(-x * x / (4.0 * kLn2));
  }
  return std::exp(-kPi * fwhm * std::abs(t));
}

double line(LineShape shape, double f, double center, double fwhm) {
  const double u = (f - center) / fwhm;
  if (shape == LineShape::Gaussian) return std::exp(-4.0 * kLn2 * u * u);
  return 1.0 / (1.0 + 4.0 * u * u);
}

}  // namespace

std::string to_string(LineShape s) { return s == LineShape::Gaussian ? "gaussian" : "lorentzian"; }

LineShape parse_line_shape(const std::string& name) {
  if (name == "gaussian") return LineShape::Gaussian;
  if (name == "lorentzian") return LineShape::Lorentzian;
  throw InvalidArgument("unknown line shape '" + name + "'");
}

void DoubletModel::validate() const {
  if (!(linewidth_fwhm > 0)) throw InvalidArgument("doublet: linewidth must be positive");
  for (double a : amplitudes) {
    if (!(a >= 0) || !std::isfinite(a)) throw InvalidArgument("doublet: amplitudes must be >= 0");
  }
  for (double f : offsets) {
    if (!std::isfinite(f)) throw InvalidArgument("doublet: offsets must be finite");
  }
}

EchoTrace sum_echo_train(const EchoTrace& single, const CpmgSequence& sequence) {
  if (sequence.n_echoes < 1) throw InvalidArgument("CPMG: need at least one echo");
  EchoTrace out = single;
  for (auto& v : out.inphase) v *= sequence.n_echoes;
  for (auto& v : out.quadrature) v *= sequence.n_echoes;
  return out;
}

EchoTrace synthesize_echo(const DoubletModel& model, double duration, double dt,
                          std::optional<double> envelope_center) {
  model.validate();
  if (!(dt > 0) || !(duration > 0)) throw InvalidArgument("synthesize_echo: dt and duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  if (n < 64) {
    throw InvalidArgument("synthesize_echo: trace shorter than 64 samples");
  }
  const double tc = envelope_center.value_or(0.5 * static_cast<double>(n - 1) * dt);

  EchoTrace out;
  out.dt = dt;
  out.inphase.resize(n);
  out.quadrature.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt - tc;
    const double env = envelope(model.shape, model.linewidth_fwhm, t);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      const double phase = 2.0 * kPi * model.offsets[c] * t;
      re += model.amplitudes[c] * std::cos(phase);
      im += model.amplitudes[c] * std::sin(phase);
    }
    out.inphase[k] = re * env;
    out.quadrature[k] = im * env;
  }
  return out;
}

Spectrum spectrum_from_echo(const EchoTrace& trace, int zero_pad_factor) {
  if (trace.size() == 0 || trace.inphase.size() != trace.quadrature.size()) {
    throw InvalidArgument("spectrum_from_echo: empty or ragged trace");
  }
  if (!(trace.dt > 0)) throw InvalidArgument("spectrum_from_echo: dt must be positive");
  if (zero_pad_factor < 1) throw InvalidArgument("spectrum_from_echo: zero_pad_factor must be >= 1");

  const std::size_t m = std::bit_ceil(trace.size() * static_cast<std::size_t>(zero_pad_factor));
  std::vector<std::complex<double>> in(m, {0.0, 0.0});
  for (std::size_t k = 0; k < trace.size(); ++k) in[k] = {trace.inphase[k], trace.quadrature[k]};
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  Spectrum s;
  s.freq_axis.resize(m);
  s.amplitude.resize(m);
  const double df = 1.0 / (static_cast<double>(m) * trace.dt);
  const auto half = static_cast<std::ptrdiff_t>(m / 2);
  for (std::size_t j = 0; j < m; ++j) {
    const std::ptrdiff_t bin = static_cast<std::ptrdiff_t>(j) - half;
    const std::size_t src = static_cast<std::size_t>(bin < 0 ? bin + static_cast<std::ptrdiff_t>(m) : bin);
    s.freq_axis[j] = static_cast<double>(bin) * df;
    s.amplitude[j] = trace.dt * std::abs(out[src]);
  }
  s.peaks = find_peaks(s.freq_axis, s.amplitude);
  return s;
}

std::vector<Peak> find_peaks(const std::vector<double>& freq_axis, const std::vector<double>& amplitude,
                             double floor) {
  std::vector<Peak> peaks;
  const std::size_t n = amplitude.size();
  if (n < 3) return peaks;
  const double top = *std::max_element(amplitude.begin(), amplitude.end());
  const double df = freq_axis[1] - freq_axis[0];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double y0 = amplitude[k - 1], y1 = amplitude[k], y2 = amplitude[k + 1];
    if (!(y1 > y0 && y1 >= y2) || y1 <= floor * top) continue;
    const double denom = y0 - 2.0 * y1 + y2;
    const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;

    // Half-maximum crossings, linearly interpolated; a side that runs into a
    // neighbouring peak before crossing is mirrored from the other side.
    auto crossing = [&](int dir) -> std::optional<double> {
      double prev = y1;
      for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(k) + dir; j >= 0 && j < static_cast<std::ptrdiff_t>(n); j += dir) {
        const double y = amplitude[static_cast<std::size_t>(j)];
        if (y > prev) return std::nullopt;
        if (y <= 0.5 * y1) {
          const double frac = (prev - 0.5 * y1) / (prev - y);
          return (static_cast<double>(j - static_cast<std::ptrdiff_t>(k)) - dir * (1.0 - frac)) * df;
        }
        prev = y;
      }
      return std::nullopt;
    };
    const auto left = crossing(-1);
    const auto right = crossing(+1);
    double fwhm = 0.0;
    if (left && right) {
      fwhm = *right - *left;
    } else if (left) {
      fwhm = -2.0 * *left;
    } else if (right) {
      fwhm = 2.0 * *right;
    }
    peaks.push_back({freq_axis[k] + shift * df, fwhm, y1});
  }
  return peaks;
}

std::array<Peak, 2> fit_doublet(const Spectrum& spectrum, LineShape shape) {
  std::vector<Peak> found = spectrum.peaks.empty() ? find_peaks(spectrum.freq_axis, spectrum.amplitude)
                                                   : spectrum.peaks;
  if (found.size() < 2) {
    std::ostringstream msg;
    msg << "fit_doublet: expected two peaks, found " << found.size();
    throw NumericalError(msg.str());
  }
  std::sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  found.resize(2);
  std::sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) { return a.center < b.center; });

  const double df = spectrum.df();
  const double sep = found[1].center - found[0].center;
  for (Peak& p : found) {
    if (!(p.fwhm > 0)) p.fwhm = std::max(sep, 4.0 * df);
  }
  // Fit in units of the peak separation and the taller height.
  const double fscale = std::max(sep, df);
  const double hscale = std::max(found[0].height, found[1].height);
  const double f0 = 0.5 * (found[0].center + found[1].center);

  const auto& fx = spectrum.freq_axis;
  const auto& fy = spectrum.amplitude;
  auto residual_fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t k = 0; k < fx.size(); ++k) {
      double v = 0.0;
      for (int c = 0; c < 2; ++c) {
        v += p(3 * c + 2) * hscale *
             line(shape, fx[k], f0 + p(3 * c) * fscale, std::abs(p(3 * c + 1)) * fscale);
      }
      r(static_cast<Eigen::Index>(k)) = v / hscale - fy[k] / hscale;
    }
  };
  Eigen::VectorXd x0(6);
  for (int c = 0; c < 2; ++c) {
    x0(3 * c) = (found[static_cast<std::size_t>(c)].center - f0) / fscale;
    x0(3 * c + 1) = found[static_cast<std::size_t>(c)].fwhm / fscale;
    x0(3 * c + 2) = found[static_cast<std::size_t>(c)].height / hscale;
  }
  const LeastSquaresResult fit =
      least_squares(residual_fn, static_cast<Eigen::Index>(fx.size()), x0, {1e-14, 1e-14, 4000});

  std::array<Peak, 2> out;
  for (int c = 0; c < 2; ++c) {
    out[static_cast<std::size_t>(c)] = {f0 + fit.x(3 * c) * fscale, std::abs(fit.x(3 * c + 1)) * fscale,
                                        fit.x(3 * c + 2) * hscale};
  }
  if (out[0].center > out[1].center) std::swap(out[0], out[1]);
  if (!std::isfinite(out[0].center) || !std::isfinite(out[1].center)) {
    throw NumericalError("fit_doublet: fit diverged");
  }
  return out;
}

}  // namespace bispin
