// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "bispin/echo_model.hpp"
#include "bispin/fieldmap.hpp"
#include "bispin/spectro.hpp"
#include "bispin/spin_core.hpp"
#include "bispin/transitions.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>

using namespace bispin;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWorkingField = 50.19e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void criterion(const char* id, const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failures;
  std::printf("%s %-3s %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const SpinSystem kBi = SpinSystem::bismuth();

double contrast(const std::vector<SweepPoint>& s, double* lo_out = nullptr, double* hi_out = nullptr) {
  double lo = 1e300, hi = -1e300;
  for (const auto& p : s) {
    lo = std::min(lo, p.echo.e_forbidden);
    hi = std::max(hi, p.echo.e_forbidden);
  }
  if (lo_out) *lo_out = lo;
  if (hi_out) *hi_out = hi;
  return hi - lo;
}

}  // namespace

int main() {
  criterion("1", "frequency anchor", [] {
    const double f = transition_frequency(kBi, kWorkingField, allowed_clock_transition());
    return Outcome{std::abs(f - 7.0805e9) <= 5e6, fmt("f_allowed = %.6f GHz (7.0805 +- 0.005)", f * 1e-9)};
  });

  criterion("2", "doublet splitting", [] {
    const double fa = transition_frequency(kBi, kWorkingField, allowed_clock_transition());
    const double ff = transition_frequency(kBi, kWorkingField, forbidden_clock_transition());
    const double d = std::abs(fa - ff);
    return Outcome{std::abs(d - 660e3) <= 60e3,
                   fmt("|f_a - f_f| = %.1f kHz (660 +- 60); allowed %s", d * 1e-3,
                       fa < ff ? "lower (left)" : "higher (right)")};
  });

  criterion("3", "clock transition", [] {
    const ClockTransition c = find_clock_field(kBi, allowed_clock_transition(), 0.06, 0.1);
    const double dist = std::abs(c.field_Bct - kWorkingField);
    const bool ok = std::abs(c.frequency_fct - 7.0315e9) <= 10e6 && std::abs(dist - 30e-3) <= 5e-3;
    return Outcome{ok, fmt("f_ct = %.6f GHz (7.0315 +- 0.010), B_ct = %.3f mT, |B_ct - B0| = %.3f mT (30 +- 5)",
                           c.frequency_fct * 1e-9, c.field_Bct * 1e3, dist * 1e3)};
  });

  const TransitionData ta = [] {
    TransitionData t = matrix_elements(kBi, kWorkingField, allowed_clock_transition());
    t.df_dB = transition_gradient(kBi, kWorkingField, allowed_clock_transition());
    return t;
  }();
  const TransitionData tf = [] {
    TransitionData t = matrix_elements(kBi, kWorkingField, forbidden_clock_transition());
    t.df_dB = transition_gradient(kBi, kWorkingField, forbidden_clock_transition());
    return t;
  }();

  criterion("4a", "df/dB opposite signs", [&] {
    return Outcome{ta.df_dB * tf.df_dB < 0,
                   fmt("df/dB allowed = %.4e Hz/T, forbidden = %.4e Hz/T", ta.df_dB, tf.df_dB)};
  });
  criterion("4b", "dominant helicity swapped", [&] {
    return Outcome{ta.dominant() != tf.dominant(),
                   fmt("allowed %s (|s+| %.4f, |s-| %.4f), forbidden %s (|s+| %.4f, |s-| %.4f)",
                       to_string(ta.dominant()).c_str(), ta.mel_sigma_plus, ta.mel_sigma_minus,
                       to_string(tf.dominant()).c_str(), tf.mel_sigma_plus, tf.mel_sigma_minus)};
  });
  criterion("4c", "helicity selectivity >= 10", [&] {
    return Outcome{ta.selectivity() >= 10 && tf.selectivity() >= 10,
                   fmt("allowed %g, forbidden %g", ta.selectivity(), tf.selectivity())};
  });

  criterion("5", "Breit-Rabi oracle", [] {
    double worst = 0, worst_field = 0;
    for (int k = 0; k <= 100; ++k) {
      const double b = 0.01 * k;
      const EigenSystem e = diagonalize(hamiltonian(kBi, b));
      const auto ref = oracle::analytic_breit_rabi(kBi, b);
      for (std::size_t j = 0; j < ref.size(); ++j) {
        const double rel = std::abs(e.energies(static_cast<Eigen::Index>(j)) - ref[j]) / std::abs(ref[j]);
        if (rel > worst) {
          worst = rel;
          worst_field = b;
        }
      }
    }
    return Outcome{worst < 1e-9, fmt("max relative error %.3e at %.2f T (101 fields x 20 levels)", worst,
                                     worst_field)};
  });

  criterion("6", "circular decomposition", [] {
    double worst_identity = 0;
    bool linear_ok = true, circular_ok = true;
    for (int i = 0; i < 100; ++i) {
      const double d = 1e-5 * (i + 1);
      for (int j = 0; j < 100; ++j) {
        const double c = 1e-5 * j;
        for (int k = 0; k < 36; ++k) {
          const double phi = 2 * kPi * k / 36;
          const CircularPair p = circular_components(d, c, phi);
          const double lhs = p.clockwise * p.clockwise + p.counterclockwise * p.counterclockwise;
          const double rhs = 0.5 * (d * d + c * c);
          worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / rhs);
          if (c == 0.0) linear_ok &= std::abs(p.clockwise - p.counterclockwise) <= 1e-12 * d;
        }
        const CircularPair lin = circular_components(0.0, d, 0.3 * i);
        linear_ok &= std::abs(lin.clockwise - lin.counterclockwise) <= 1e-12 * d;
      }
      const CircularPair pure = circular_components(d, d, 0.0);
      circular_ok &= pure.counterclockwise == 0.0 && std::abs(pure.clockwise - d) <= 1e-12 * d;
    }
    return Outcome{worst_identity < 1e-12 && linear_ok && circular_ok,
                   fmt("identity max rel %.2e; linear drive equal %s; matched phi=0 pure %s", worst_identity,
                       linear_ok ? "yes" : "no", circular_ok ? "yes" : "no")};
  });

  criterion("7", "phase-sweep contrast", [] {
    const auto phases = phase_grid(25);
    const double b = 0.013;
    DriveConfig d;
    d.b1_cpw_scale = d.b1_dielectric / b;
    const std::vector<FieldSample> single{make_sample({0, 0}, {0, b}, 1.0)};
    double lo = 0, hi = 0;
    contrast(phase_sweep(single, d, phases, Normalization::PerPoint, Pairing{}), &lo, &hi);
    const bool homogeneous_ok = std::abs(lo) <= 1e-15 && std::abs(hi - 1.0) <= 1e-15;

    const auto samples = sample_donors(CPWGeometry{}, ImplantRegion{}, 32, 8);
    const auto sweep = phase_sweep(samples, DriveConfig{}, phases, Normalization::PerPoint, Pairing{});
    const double cpw = contrast(sweep);

    // Frozen regression values of the default curve.
    const double golden_f0 = 9.9748823390517416e-01, golden_a1 = 1.3985888929706265e-02;
    const double golden_err = std::max(std::abs(sweep[0].echo.e_forbidden - golden_f0),
                                       std::abs(sweep[1].echo.e_allowed - golden_a1));
    return Outcome{homogeneous_ok && cpw < 1.0 && golden_err < 1e-12,
                   fmt("homogeneous min/max = %.1e/%.16f; CPW contrast %.6f < 1; golden dev %.1e", lo, hi, cpw,
                       golden_err)};
  });

  criterion("8", "fit round-trip", [] {
    const auto samples = sample_donors(CPWGeometry{}, ImplantRegion{}, 32, 8);
    const auto phases = phase_grid(25);
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> ud(1.2e-4, 2.2e-4), us(0.9e-2, 1.6e-2), uo(0.3, 1.2), sign(-1, 1),
        perturb(-0.2, 0.2);
    double worst = 0;
    int passed = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const FitParams truth{ud(rng), us(rng), (sign(rng) < 0 ? -1 : 1) * uo(rng), 0};
      const auto data = model_curve(phases, samples, FitFixed{}, truth, Pairing{});
      const FitParams init{truth.b1_dielectric * (1 + perturb(rng)), truth.b1_cpw_scale * (1 + perturb(rng)),
                           truth.phase_offset + perturb(rng), 0};
      const FitResult r = fit_phase_dependence(data, samples, FitFixed{}, init, Pairing{});
      const double e = std::max({std::abs(r.params.b1_dielectric / truth.b1_dielectric - 1),
                                 std::abs(r.params.b1_cpw_scale / truth.b1_cpw_scale - 1),
                                 std::abs(r.params.phase_offset / truth.phase_offset - 1)});
      worst = std::max(worst, e);
      if (e <= 0.05) ++passed;
    }
    return Outcome{passed == 20, fmt("%d/20 trials within 5%%; worst relative error %.2e", passed, worst)};
  });

  criterion("9", "spectrum round-trip", [] {
    DoubletModel m;
    m.offsets = {1.035e6, 1.035e6 + 660e3};
    m.linewidth_fwhm = 300e3;
    const Spectrum s = spectrum_from_echo(synthesize_echo(m, 20e-6, 50e-9), 8);
    const auto p = fit_doublet(s);
    const double sep = p[1].center - p[0].center;
    const bool ok = std::abs(sep - 660e3) <= 30e3 && std::abs(p[0].fwhm - 300e3) <= 15e3 &&
                    std::abs(p[1].fwhm - 300e3) <= 15e3;
    return Outcome{ok, fmt("separation %.2f kHz (660 +- 30), widths %.2f / %.2f kHz (300 +- 15)", sep * 1e-3,
                           p[0].fwhm * 1e-3, p[1].fwhm * 1e-3)};
  });

  criterion("10", "field map", [] {
    CPWGeometry coarse, fine;
    fine.filaments_per_strip = 4 * coarse.filaments_per_strip;
    const CPWFieldModel mc(coarse), mf(fine);
    ImplantRegion pos, neg;
    neg.side = GapSide::Negative;
    const auto sp = sample_donors(coarse, pos, 32, 8);
    double refine = 0, mirror = 0;
    for (const auto& s : sp) {
      const FieldVector a = mc.field_at(s.position), b = mf.field_at(s.position);
      refine = std::max(refine, std::hypot(a.Bx - b.Bx, a.Bz - b.Bz) / b.magnitude());
      const FieldVector m = mc.field_at({-s.position.x, s.position.z});
      mirror = std::max(mirror, std::hypot(a.Bx - m.Bx, a.Bz + m.Bz) / a.magnitude());
    }
    const FieldVector mid = mc.field_at({coarse.gap_center(), 0.5 * pos.depth_max});
    const double normal = std::abs(mid.Bz) / mid.magnitude();
    return Outcome{refine < 5e-3 && mirror <= 1e-12 && normal > 0.8,
                   fmt("refinement N=%d->%d max change %.3e; mirror antisymmetry dev %.1e; mid-gap |Bz|/|B| = %.6f",
                       coarse.filaments_per_strip, fine.filaments_per_strip, refine, mirror, normal)};
  });

  std::printf("%s: %d criterion(s) failed\n", g_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", g_failures);
  return g_failures ? 1 : 0;
}
