// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/error.hpp"
#include "bispin/spectro.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bispin;

namespace {

constexpr double kDuration = 20e-6;
constexpr double kDt = 50e-9;

DoubletModel doublet(double f1, double f2, double a1 = 1.0, double a2 = 1.0, double width = 300e3) {
  DoubletModel m;
  m.offsets = {f1, f2};
  m.amplitudes = {a1, a2};
  m.linewidth_fwhm = width;
  return m;
}

}  // namespace

TEST(Synthesize, SampleCountAndValidation) {
  const EchoTrace t = synthesize_echo(doublet(0, 0), kDuration, kDt);
  EXPECT_EQ(t.size(), 400u);
  EXPECT_EQ(t.quadrature.size(), 400u);
  EXPECT_THROW(synthesize_echo(doublet(0, 0), 63 * kDt, kDt), InvalidArgument);
  EXPECT_THROW(synthesize_echo(doublet(0, 0, 1, 1, -1), kDuration, kDt), InvalidArgument);
}

TEST(Synthesize, OnResonanceHasNoQuadrature) {
  for (LineShape s : {LineShape::Gaussian, LineShape::Lorentzian}) {
    DoubletModel m = doublet(0, 0, 0.3, 0.7);
    m.shape = s;
    const EchoTrace t = synthesize_echo(m, kDuration, kDt, 200 * kDt);
    for (double q : t.quadrature) EXPECT_EQ(q, 0.0);
    const auto peak = std::max_element(t.inphase.begin(), t.inphase.end());
    EXPECT_DOUBLE_EQ(*peak, 1.0);
  }
}

TEST(Synthesize, SymmetricOffsetsCancelQuadratureAtCenter) {
  const EchoTrace t = synthesize_echo(doublet(-400e3, 400e3), kDuration, kDt, 200 * kDt);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t.quadrature[k], 0.0, 1e-15);
}

TEST(EchoTrain, ScalesByEchoCount) {
  const EchoTrace one = synthesize_echo(doublet(1e6, 1.7e6), kDuration, kDt);
  const EchoTrace five = sum_echo_train(one, CpmgSequence{60e-6, 5});
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_DOUBLE_EQ(five.inphase[k], 5 * one.inphase[k]);
    EXPECT_DOUBLE_EQ(five.quadrature[k], 5 * one.quadrature[k]);
  }
  EXPECT_THROW(sum_echo_train(one, CpmgSequence{60e-6, 0}), InvalidArgument);
}

TEST(Spectrum, AxisAndLength) {
  const Spectrum s = spectrum_from_echo(synthesize_echo(doublet(0, 0), kDuration, kDt), 8);
  ASSERT_EQ(s.freq_axis.size(), 4096u);
  EXPECT_NEAR(s.df(), 1.0 / (4096 * kDt), 1e-6);
  EXPECT_EQ(s.freq_axis[2048], 0.0);
  for (std::size_t k = 1; k < s.freq_axis.size(); ++k) EXPECT_GT(s.freq_axis[k], s.freq_axis[k - 1]);
  EXPECT_THROW(spectrum_from_echo(EchoTrace{}, 8), InvalidArgument);
}

TEST(Spectrum, Parseval) {
  const EchoTrace t = synthesize_echo(doublet(1.03e6, 1.73e6, 0.8, 1.0), kDuration, kDt);
  const Spectrum s = spectrum_from_echo(t, 4);
  double time_energy = 0, freq_energy = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    time_energy += (t.inphase[k] * t.inphase[k] + t.quadrature[k] * t.quadrature[k]) * t.dt;
  }
  for (double a : s.amplitude) freq_energy += a * a * s.df();
  EXPECT_NEAR(freq_energy, time_energy, 1e-9 * time_energy);
}

TEST(Spectrum, SingleToneWithinHalfBin) {
  for (double f : {-3.3e6, -0.21e6, 0.0, 1.0345e6, 4.9e6}) {
    const Spectrum s = spectrum_from_echo(synthesize_echo(doublet(f, f, 0.5, 0.5), kDuration, kDt), 8);
    ASSERT_EQ(s.peaks.size(), 1u) << f;
    EXPECT_NEAR(s.peaks[0].center, f, 0.5 * s.df());
    EXPECT_NEAR(s.peaks[0].fwhm, 300e3, 0.05 * 300e3);
  }
}

TEST(Spectrum, LorentzianWidth) {
  DoubletModel m = doublet(0.5e6, 0.5e6);
  m.shape = LineShape::Lorentzian;
  const Spectrum s = spectrum_from_echo(synthesize_echo(m, 80e-6, kDt), 8);
  ASSERT_FALSE(s.peaks.empty());
  EXPECT_NEAR(s.peaks[0].fwhm, 300e3, 0.05 * 300e3);
}

TEST(Spectrum, TimeShiftInvariance) {
  const DoubletModel m = doublet(1.035e6, 1.734e6);
  const Spectrum a = spectrum_from_echo(synthesize_echo(m, kDuration, kDt), 8);
  const Spectrum b = spectrum_from_echo(synthesize_echo(m, kDuration, kDt, 9.95e-6 - 40 * kDt), 8);
  ASSERT_EQ(a.peaks.size(), 2u);
  ASSERT_EQ(b.peaks.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(a.peaks[k].center, b.peaks[k].center, 0.01 * a.df());
    EXPECT_NEAR(a.peaks[k].height, b.peaks[k].height, 1e-6 * a.peaks[k].height);
  }
}

TEST(Doublet, WorkingPointSeparation) {
  const DoubletModel m = doublet(1.035e6, 1.734e6);
  const Spectrum s = spectrum_from_echo(synthesize_echo(m, kDuration, kDt), 8);
  const auto fit = fit_doublet(s);
  EXPECT_NEAR(fit[1].center - fit[0].center, 699e3, 5e3);
  EXPECT_NEAR(fit[0].fwhm, 300e3, 0.1 * 300e3);
  EXPECT_NEAR(fit[1].fwhm, 300e3, 0.1 * 300e3);
  EXPECT_NEAR(fit[0].height / fit[1].height, 1.0, 0.01);
}

TEST(Doublet, AmplitudeRatioCarriesThrough) {
  for (double ratio : {0.25, 0.5, 2.0}) {
    const Spectrum s = spectrum_from_echo(synthesize_echo(doublet(-0.6e6, 0.6e6, ratio, 1.0), kDuration, kDt), 8);
    const auto fit = fit_doublet(s);
    EXPECT_NEAR(fit[0].height / fit[1].height, ratio, 0.02 * ratio);
  }
}

TEST(Doublet, RandomizedRoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> width(150e3, 450e3), center(-3e6, 3e6), amp(0.3, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double w = width(rng);
    const double f1 = center(rng);
    std::uniform_real_distribution<double> sep(1.5 * w, 3e6);
    const double f2 = f1 + sep(rng);
    const double a1 = amp(rng), a2 = amp(rng);
    const Spectrum s = spectrum_from_echo(synthesize_echo(doublet(f1, f2, a1, a2, w), 40e-6, kDt), 8);
    const auto fit = fit_doublet(s);
    EXPECT_NEAR(fit[0].center, f1, 0.02 * w) << trial;
    EXPECT_NEAR(fit[1].center, f2, 0.02 * w) << trial;
    EXPECT_NEAR(fit[0].fwhm, w, 0.05 * w) << trial;
    EXPECT_NEAR(fit[1].fwhm, w, 0.05 * w) << trial;
    EXPECT_NEAR(fit[0].height / fit[1].height, a1 / a2, 0.05 * a1 / a2) << trial;
  }
}

TEST(Doublet, FewerThanTwoPeaks) {
  const Spectrum s = spectrum_from_echo(synthesize_echo(doublet(1e6, 1e6), kDuration, kDt), 8);
  try {
    fit_doublet(s);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("found 1"), std::string::npos);
  }
}

TEST(LineShapes, Parse) {
  EXPECT_EQ(parse_line_shape("lorentzian"), LineShape::Lorentzian);
  EXPECT_EQ(to_string(LineShape::Gaussian), "gaussian");
  EXPECT_THROW(parse_line_shape("voigt"), InvalidArgument);
}
