// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/cli.hpp"

#include "bispin/csv.hpp"
#include "bispin/echo_model.hpp"
#include "bispin/error.hpp"
#include "bispin/fieldmap.hpp"
#include "bispin/spectro.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <sstream>

namespace bispin {

namespace {

template <typename Body>
CommandResult guarded(Body&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    return {kExitUsage, {}, e.what()};
  } catch (const NumericalError& e) {
    return {kExitNumerical, {}, e.what()};
  } catch (const DataError& e) {
    return {kExitData, {}, e.what()};
  } catch (const InvalidArgument& e) {
    return {kExitData, {}, e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    return {kExitData, {}, e.what()};
  }
}

std::string label_column(const StateLabel& l) {
  std::ostringstream s;
  s << "E_" << l.F << '_' << (l.mF > 0 ? "+" : "") << l.mF << "_Hz";
  return s.str();
}

struct PairContext {
  TransitionSpec allowed_spec;
  TransitionSpec forbidden_spec;
  TransitionData allowed;
  TransitionData forbidden;
  Pairing pairing;
  RabiWeights weights;
};

PairContext clock_pair(const RunConfig& config) {
  PairContext ctx;
  ctx.allowed_spec = allowed_clock_transition();
  ctx.forbidden_spec = forbidden_clock_transition();
  const double b = config.experiment.field_B0;
  ctx.allowed = matrix_elements(config.spin, b, ctx.allowed_spec);
  ctx.forbidden = matrix_elements(config.spin, b, ctx.forbidden_spec);
  ctx.pairing = Pairing::from_allowed(ctx.allowed);
  if (config.rabi_weighting) {
    ctx.weights = {std::max(ctx.allowed.mel_sigma_plus, ctx.allowed.mel_sigma_minus),
                   std::max(ctx.forbidden.mel_sigma_plus, ctx.forbidden.mel_sigma_minus)};
  }
  return ctx;
}

void describe_pair(Report& r, const PairContext& ctx) {
  r.add("allowed_transition", ctx.allowed_spec.to_string());
  r.add("forbidden_transition", ctx.forbidden_spec.to_string());
  r.add("allowed_helicity", to_string(ctx.allowed.dominant()));
  r.add("forbidden_helicity", to_string(ctx.forbidden.dominant()));
  r.add("sigma_plus_is_clockwise", kSigmaPlusIsClockwise);
  r.add("allowed_sense", to_string(ctx.pairing.allowed));
  r.add("forbidden_sense", to_string(ctx.pairing.forbidden()));
  r.add("rabi_weight_allowed", ctx.weights.allowed);
  r.add("rabi_weight_forbidden", ctx.weights.forbidden);
}

CommandResult done(ArtifactWriter& writer, const std::string& message = {}) {
  return {kExitOk, writer.commit(), message};
}

}  // namespace

StateLabel parse_label(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("label '" + text + "' must look like F,mF");
  try {
    std::size_t p1 = 0, p2 = 0;
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    const StateLabel l{std::stod(a, &p1), std::stod(b, &p2)};
    if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing");
    return l;
  } catch (const std::exception&) {
    throw UsageError("label '" + text + "' must look like F,mF");
  }
}

CommandResult cmd_breit_rabi(const RunConfig& config, double b_min, double b_max, int n_points) {
  return guarded([&] {
    if (!(b_min >= 0) || !(b_max > b_min) || !std::isfinite(b_max)) {
      throw UsageError("breit-rabi: need 0 <= b-min < b-max");
    }
    if (n_points < 2) throw UsageError("breit-rabi: need at least 2 points");

    std::vector<StateLabel> columns;
    const double fmax = config.spin.electron_spin + config.spin.nuclear_spin;
    const double fmin = std::abs(config.spin.electron_spin - config.spin.nuclear_spin);
    for (double f = fmax; f >= fmin - 1e-9; f -= 1.0) {
      for (double m = f; m >= -f - 1e-9; m -= 1.0) columns.push_back({f, m});
    }
    std::vector<std::string> header{"B0_T"};
    for (const auto& l : columns) header.push_back(label_column(l));
    CsvWriter csv(header);
    for (int k = 0; k < n_points; ++k) {
      const double b = k + 1 == n_points ? b_max : b_min + (b_max - b_min) * k / (n_points - 1);
      const auto energies = labeled_energies(config.spin, b);
      std::vector<double> row{b};
      for (const auto& l : columns) row.push_back(energies.at(l));
      csv.add_row(row);
    }
    ArtifactWriter w(config.output_dir);
    w.add("breit_rabi.csv", csv.text());
    return done(w);
  });
}

CommandResult cmd_transitions(const RunConfig& config, double B0) {
  return guarded([&] {
    if (!(B0 >= 0)) throw UsageError("transitions: field must be >= 0");
    const auto list = list_transitions(config.spin, B0, config.experiment.excitation_freq,
                                       config.experiment.window, config.experiment.min_mel);
    CsvWriter csv({"B0_T", "F_up", "mF_up", "F_lo", "mF_lo", "freq_Hz", "dfdB_HzPerT", "mel_plus",
                   "mel_minus", "mel_x"});
    for (const auto& e : list) {
      csv.add_row({B0, e.spec.upper.F, e.spec.upper.mF, e.spec.lower.F, e.spec.lower.mF, e.data.frequency,
                   e.data.df_dB, e.data.mel_sigma_plus, e.data.mel_sigma_minus, e.data.mel_linear_x});
    }
    ArtifactWriter w(config.output_dir);
    w.add("transitions.csv", csv.text());
    return done(w);
  });
}

CommandResult cmd_clock(const RunConfig& config, const TransitionSpec& transition, double b_low,
                        double b_high) {
  return guarded([&] {
    if (!(b_low > kDefaultGradientStep) || !(b_high > b_low)) {
      throw UsageError("clock: bracket must satisfy 10 uT < b-low < b-high");
    }
    const ClockTransition ct = find_clock_field(config.spin, transition, b_low, b_high);
    Report r;
    r.add("transition", ct.transition.to_string());
    r.add("bracket_low_T", b_low);
    r.add("bracket_high_T", b_high);
    r.add("field_Bct_T", ct.field_Bct);
    r.add("frequency_fct_Hz", ct.frequency_fct);
    r.add("curvature_HzPerT2", ct.curvature);
    ArtifactWriter w(config.output_dir);
    w.add("clock.txt", r.text());
    return done(w);
  });
}

CommandResult cmd_fieldmap(const RunConfig& config) {
  return guarded([&] {
    const auto samples = sample_donors(config.geometry, config.implant, config.n_lateral, config.n_depth);
    CsvWriter csv({"x_m", "z_m", "Bx_TperA", "Bz_TperA", "weight"});
    for (const auto& s : samples) {
      csv.add_row({s.position.x, s.position.z, s.b1.Bx, s.b1.Bz, s.weight});
    }
    const FieldStats st = field_stats(samples);
    Report r;
    r.add("current_profile", to_string(config.geometry.profile));
    r.add("n_samples", static_cast<int>(samples.size()));
    r.add("mean_B1_TperA", st.mean);
    r.add("std_B1_TperA", st.std);
    r.add("relative_std", st.relative_std());
    r.add("min_B1_TperA", st.min);
    r.add("max_B1_TperA", st.max);
    r.add("mean_angle_from_normal_rad", st.mean_angle_from_normal);
    ArtifactWriter w(config.output_dir);
    w.add("fieldmap.csv", csv.text());
    w.add("fieldmap_stats.txt", r.text());
    return done(w);
  });
}

CommandResult cmd_phase_sweep(const RunConfig& config, int n_phases, Normalization normalization) {
  return guarded([&] {
    if (n_phases < 1) throw UsageError("phase-sweep: need at least one phase");
    const auto samples = sample_donors(config.geometry, config.implant, config.n_lateral, config.n_depth);
    const PairContext ctx = clock_pair(config);
    const auto phases = phase_grid(n_phases);
    const auto sweep = phase_sweep(samples, config.drive, phases, normalization, ctx.pairing,
                                   config.spin.constants, ctx.weights);
    CsvWriter csv({"phi_rad", "e_f_norm", "e_a_norm"});
    for (const auto& p : sweep) csv.add_row({p.phi, p.echo.e_forbidden, p.echo.e_allowed});

    Report r;
    describe_pair(r, ctx);
    r.add("normalization", to_string(normalization));
    r.add("n_phases", n_phases);
    r.add("n_samples", static_cast<int>(samples.size()));
    r.add("b1_dielectric_T", config.drive.b1_dielectric);
    r.add("b1_cpw_scale", config.drive.b1_cpw_scale);
    r.add("tau_pi_s", config.drive.tau_pi);
    r.add("g_drive", config.drive.g_drive);
    ArtifactWriter w(config.output_dir);
    w.add("phase_sweep.csv", csv.text());
    w.add("phase_sweep_meta.txt", r.text());
    return done(w);
  });
}

CommandResult cmd_fit(const RunConfig& config, const std::filesystem::path& data_csv, const FitInit& init) {
  return guarded([&] {
    const CsvTable table = read_csv(data_csv);
    const std::size_t cphi = table.column("phi_rad");
    const std::size_t cf = table.column("e_forbidden");
    const std::size_t ca = table.column("e_allowed");
    if (table.rows.empty()) throw DataError(data_csv.string() + ": no data rows");
    std::vector<PhaseDatum> data;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
      const auto& row = table.rows[k];
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw DataError(data_csv.string() + ": line " + std::to_string(table.line_numbers[k]) +
                          ": non-finite value");
        }
      }
      // Measured amplitudes are normalized here, per phase point.
      const double total = row[cf] + row[ca];
      if (!(total > 0)) {
        throw DataError(data_csv.string() + ": line " + std::to_string(table.line_numbers[k]) +
                        ": e_forbidden + e_allowed must be positive");
      }
      data.push_back({row[cphi], row[cf] / total, row[ca] / total});
    }
    if (data.size() < 6) throw DataError(data_csv.string() + ": need at least 6 data rows");

    const auto samples = sample_donors(config.geometry, config.implant, config.n_lateral, config.n_depth);
    const PairContext ctx = clock_pair(config);
    FitParams start;
    start.b1_dielectric = init.b1_dielectric.value_or(config.drive.b1_dielectric);
    start.b1_cpw_scale = init.b1_cpw_scale.value_or(config.drive.b1_cpw_scale);
    start.phase_offset = init.phase_offset;
    const FitResult fit = fit_phase_dependence(data, samples, {config.drive.tau_pi, config.drive.g_drive},
                                               start, ctx.pairing, config.spin.constants, ctx.weights);

    Report r;
    r.add("b1_dielectric_T", fit.params.b1_dielectric);
    r.add("b1_cpw_scale", fit.params.b1_cpw_scale);
    r.add("phase_offset_rad", fit.params.phase_offset);
    r.add("residual_sse", fit.params.residual_sse);
    r.add("initial_sse", fit.initial_sse);
    r.add("improved", fit.improved);
    r.add("degenerate", fit.degenerate);
    r.add("converged", fit.converged);
    r.add("evaluations", fit.evaluations);
    r.add("alternate_basin_sse", fit.alternate_sse);
    r.add("n_points", static_cast<int>(data.size()));
    describe_pair(r, ctx);

    CsvWriter csv({"phi_rad", "residual_forbidden", "residual_allowed"});
    for (std::size_t k = 0; k < data.size(); ++k) {
      csv.add_row({data[k].phi, fit.residuals_forbidden[k], fit.residuals_allowed[k]});
    }
    ArtifactWriter w(config.output_dir);
    w.add("fit_report.txt", r.text());
    w.add("fit_residuals.csv", csv.text());
    return done(w, fit.degenerate ? "fit is degenerate (see report)" : "");
  });
}

CommandResult cmd_spectrum(const RunConfig& config, double B0) {
  return guarded([&] {
    if (!(B0 >= 0)) throw UsageError("spectrum: field must be >= 0");
    const ExperimentConfig& ex = config.experiment;
    const auto list = list_transitions(config.spin, B0, ex.excitation_freq, ex.window, ex.min_mel);
    if (list.size() != 2) {
      throw NumericalError("spectrum: expected 2 transitions within " + format_double(ex.window) +
                           " Hz of the excitation frequency, found " + std::to_string(list.size()));
    }
    // The high-field allowed line keeps mI: its upper state sits one mF unit
    // above its lower state. The forbidden partner has the opposite step.
    const auto step = [](const TransitionEntry& e) { return e.spec.upper.mF - e.spec.lower.mF; };
    int ia = -1;
    for (int k = 0; k < 2; ++k) {
      if (step(list[static_cast<std::size_t>(k)]) == 1.0 && step(list[static_cast<std::size_t>(1 - k)]) == -1.0) ia = k;
    }
    if (ia < 0) throw NumericalError("spectrum: the two transitions do not form an allowed/forbidden pair");
    const TransitionEntry& allowed = list[static_cast<std::size_t>(ia)];
    const TransitionEntry& forbidden = list[static_cast<std::size_t>(1 - ia)];

    const Pairing pairing = Pairing::from_allowed(allowed.data);
    RabiWeights weights;
    if (config.rabi_weighting) {
      weights = {std::max(allowed.data.mel_sigma_plus, allowed.data.mel_sigma_minus),
                 std::max(forbidden.data.mel_sigma_plus, forbidden.data.mel_sigma_minus)};
    }
    const auto samples = sample_donors(config.geometry, config.implant, config.n_lateral, config.n_depth);
    const EchoPair echo =
        ensemble_echo(samples, config.drive, pairing, config.spin.constants, weights).normalized_pair();

    DoubletModel model;
    model.offsets = {allowed.data.frequency - ex.excitation_freq, forbidden.data.frequency - ex.excitation_freq};
    model.amplitudes = {echo.e_allowed, echo.e_forbidden};
    model.linewidth_fwhm = ex.linewidth;
    model.excitation_freq = ex.excitation_freq;
    model.shape = ex.line_shape;
    const EchoTrace trace = sum_echo_train(synthesize_echo(model, ex.trace_duration, ex.trace_dt), ex.cpmg);
    const Spectrum spec = spectrum_from_echo(trace, ex.zero_pad);
    const auto peaks = fit_doublet(spec, ex.line_shape);

    CsvWriter tcsv({"t_s", "inphase", "quadrature"});
    for (std::size_t k = 0; k < trace.size(); ++k) {
      tcsv.add_row({static_cast<double>(k) * trace.dt, trace.inphase[k], trace.quadrature[k]});
    }
    CsvWriter scsv({"offset_Hz", "amplitude"});
    for (std::size_t k = 0; k < spec.freq_axis.size(); ++k) scsv.add_row({spec.freq_axis[k], spec.amplitude[k]});

    Report r;
    r.add("field_T", B0);
    r.add("excitation_freq_Hz", ex.excitation_freq);
    r.add("allowed_transition", allowed.spec.to_string());
    r.add("forbidden_transition", forbidden.spec.to_string());
    r.add("allowed_offset_Hz", model.offsets[0]);
    r.add("forbidden_offset_Hz", model.offsets[1]);
    r.add("e_allowed", echo.e_allowed);
    r.add("e_forbidden", echo.e_forbidden);
    for (std::size_t k = 0; k < 2; ++k) {
      const std::string p = "peak" + std::to_string(k + 1) + "_";
      const bool is_allowed = std::abs(peaks[k].center - model.offsets[0]) <
                              std::abs(peaks[k].center - model.offsets[1]);
      r.add(p + "assignment", std::string(is_allowed ? "allowed" : "forbidden"));
      r.add(p + "center_Hz", peaks[k].center);
      r.add(p + "fwhm_Hz", peaks[k].fwhm);
      r.add(p + "height", peaks[k].height);
    }
    r.add("separation_Hz", peaks[1].center - peaks[0].center);
    r.add("line_shape", to_string(ex.line_shape));
    r.add("cpmg_tau_s", ex.cpmg.tau);
    r.add("cpmg_echoes", ex.cpmg.n_echoes);

    ArtifactWriter w(config.output_dir);
    w.add("trace.csv", tcsv.text());
    w.add("spectrum.csv", scsv.text());
    w.add("peaks.txt", r.text());
    return done(w);
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bi donor clock-transition simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  app.add_option("--config", config_path, "Run configuration (INI)");
  app.add_option("--out", out_dir, "Output directory (overrides [output] dir)");

  double br_min = 0.0, br_max = 0.2;
  int br_n = 201;
  auto* br = app.add_subcommand("breit-rabi", "Labeled level energies versus field");
  br->add_option("--b-min", br_min, "Lowest field (T)");
  br->add_option("--b-max", br_max, "Highest field (T)");
  br->add_option("--n-points", br_n, "Number of fields");

  double tr_field = -1.0;
  auto* tr = app.add_subcommand("transitions", "Transitions near the excitation frequency");
  tr->add_option("--field", tr_field, "Static field (T); default from config");

  std::string ck_which = "allowed", ck_upper, ck_lower;
  double ck_low = 0.01, ck_high = 0.2;
  auto* ck = app.add_subcommand("clock", "Locate a clock transition");
  ck->add_option("--transition", ck_which, "allowed | forbidden")->check(CLI::IsMember({"allowed", "forbidden"}));
  ck->add_option("--upper", ck_upper, "Upper label F,mF (overrides --transition)");
  ck->add_option("--lower", ck_lower, "Lower label F,mF");
  ck->add_option("--b-low", ck_low, "Bracket low end (T)");
  ck->add_option("--b-high", ck_high, "Bracket high end (T)");

  auto* fm = app.add_subcommand("fieldmap", "CPW field at the donor samples");

  int ps_n = 25;
  std::string ps_norm;
  auto* ps = app.add_subcommand("phase-sweep", "Echo amplitudes versus relative phase");
  ps->add_option("--n-phases", ps_n, "Number of phases over [0, 2 pi]");
  ps->add_option("--normalize", ps_norm, "per_point | global | none");

  std::string fit_data;
  std::optional<double> fit_b1d, fit_scale;
  double fit_offset = 0.0;
  auto* ft = app.add_subcommand("fit", "Fit the echo model to measured phase data");
  ft->add_option("--data", fit_data, "CSV with phi_rad,e_forbidden,e_allowed")->required();
  ft->add_option("--init-b1-dielectric", fit_b1d, "Initial B1 of the dielectric resonator (T)");
  ft->add_option("--init-cpw-scale", fit_scale, "Initial CPW scale");
  ft->add_option("--init-phase-offset", fit_offset, "Initial phase offset (rad)");

  double sp_field = -1.0;
  auto* sp = app.add_subcommand("spectrum", "Synthesize and analyse the doublet echo");
  sp->add_option("--field", sp_field, "Static field (T); default from config");

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;

  CommandResult result;
  if (br->parsed()) {
    result = cmd_breit_rabi(config, br_min, br_max, br_n);
  } else if (tr->parsed()) {
    result = cmd_transitions(config, tr_field >= 0 ? tr_field : config.experiment.field_B0);
  } else if (ck->parsed()) {
    result = guarded([&] {
      TransitionSpec t = ck_which == "allowed" ? allowed_clock_transition() : forbidden_clock_transition();
      if (!ck_upper.empty() || !ck_lower.empty()) {
        if (ck_upper.empty() || ck_lower.empty()) throw UsageError("clock: give both --upper and --lower");
        t = {parse_label(ck_upper), parse_label(ck_lower)};
      }
      return cmd_clock(config, t, ck_low, ck_high);
    });
  } else if (fm->parsed()) {
    result = cmd_fieldmap(config);
  } else if (ps->parsed()) {
    result = guarded([&] {
      Normalization n = config.experiment.normalization;
      if (!ps_norm.empty()) {
        try {
          n = parse_normalization(ps_norm);
        } catch (const InvalidArgument& e) {
          throw UsageError(e.what());
        }
      }
      return cmd_phase_sweep(config, ps_n, n);
    });
  } else if (ft->parsed()) {
    result = cmd_fit(config, fit_data, {fit_b1d, fit_scale, fit_offset});
  } else if (sp->parsed()) {
    result = cmd_spectrum(config, sp_field >= 0 ? sp_field : config.experiment.field_B0);
  }

  if (!result.message.empty()) (result.exit_code == kExitOk ? out : err) << result.message << "\n";
  for (const auto& p : result.artifacts) out << "wrote " << p.string() << "\n";
  return result.exit_code;
}

}  // namespace bispin
