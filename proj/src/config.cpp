// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/config.hpp"

#include "bispin/csv.hpp"
#include "bispin/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bispin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
    throw DataError("config [" + section + "] " + key + ": '" + v + "' is not a finite number");
  }
  return d;
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
  const double d = to_double(section, key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw DataError("config [" + section + "] " + key + ": '" + v + "' is not an integer");
  }
  return static_cast<int>(d);
}

template <typename F>
auto wrap_enum(const std::string& section, const std::string& key, const std::string& v, F parse) {
  try {
    return parse(v);
  } catch (const InvalidArgument& e) {
    throw DataError("config [" + section + "] " + key + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using SectionTable = std::map<std::string, Setter>;

std::map<std::string, SectionTable> setters() {
  std::map<std::string, SectionTable> t;
#define BISPIN_NUM(sec, key, field) \
  t[sec][key] = [](RunConfig& c, const std::string& v) { c.field = to_double(sec, key, v); }
#define BISPIN_INT(sec, key, field) \
  t[sec][key] = [](RunConfig& c, const std::string& v) { c.field = to_int(sec, key, v); }

  BISPIN_NUM("spin", "electron_spin", spin.electron_spin);
  BISPIN_NUM("spin", "nuclear_spin", spin.nuclear_spin);
  BISPIN_NUM("spin", "hyperfine_A", spin.hyperfine_A);
  BISPIN_NUM("spin", "g_electron", spin.g_electron);
  BISPIN_NUM("spin", "gyromag_nuclear", spin.gyromag_nuclear);
  BISPIN_NUM("spin", "bohr_magneton", spin.constants.bohr_magneton);
  BISPIN_NUM("spin", "planck_h", spin.constants.planck_h);

  BISPIN_NUM("geometry", "center_width", geometry.center_width);
  BISPIN_NUM("geometry", "gap_width", geometry.gap_width);
  BISPIN_NUM("geometry", "ground_width", geometry.ground_width);
  BISPIN_NUM("geometry", "film_thickness", geometry.film_thickness);
  BISPIN_NUM("geometry", "drive_current", geometry.drive_current_total);
  BISPIN_INT("geometry", "filaments_per_strip", geometry.filaments_per_strip);
  t["geometry"]["current_profile"] = [](RunConfig& c, const std::string& v) {
    c.geometry.profile = wrap_enum("geometry", "current_profile", v, parse_current_profile);
  };

  BISPIN_NUM("implant", "strip_width", implant.strip_width);
  BISPIN_NUM("implant", "strip_length", implant.strip_length);
  BISPIN_NUM("implant", "depth_min", implant.depth_min);
  BISPIN_NUM("implant", "depth_max", implant.depth_max);
  BISPIN_INT("implant", "n_lateral", n_lateral);
  BISPIN_INT("implant", "n_depth", n_depth);
  t["implant"]["lateral_center"] = [](RunConfig& c, const std::string& v) {
    c.implant.lateral_center = to_double("implant", "lateral_center", v);
  };
  t["implant"]["gap"] = [](RunConfig& c, const std::string& v) {
    if (v == "positive") {
      c.implant.side = GapSide::Positive;
    } else if (v == "negative") {
      c.implant.side = GapSide::Negative;
    } else {
      throw DataError("config [implant] gap: expected 'positive' or 'negative', got '" + v + "'");
    }
  };

  BISPIN_NUM("drive", "b1_dielectric", drive.b1_dielectric);
  BISPIN_NUM("drive", "b1_cpw_scale", drive.b1_cpw_scale);
  BISPIN_NUM("drive", "phase", drive.phase_phi);
  BISPIN_NUM("drive", "tau_pi", drive.tau_pi);
  BISPIN_NUM("drive", "g_drive", drive.g_drive);
  t["drive"]["rabi_weighting"] = [](RunConfig& c, const std::string& v) {
    if (v == "bare") {
      c.rabi_weighting = false;
    } else if (v == "matrix_element") {
      c.rabi_weighting = true;
    } else {
      throw DataError("config [drive] rabi_weighting: expected 'bare' or 'matrix_element'");
    }
  };

  BISPIN_NUM("experiment", "excitation_freq", experiment.excitation_freq);
  BISPIN_NUM("experiment", "field", experiment.field_B0);
  BISPIN_NUM("experiment", "window", experiment.window);
  BISPIN_NUM("experiment", "min_mel", experiment.min_mel);
  BISPIN_NUM("experiment", "linewidth", experiment.linewidth);
  BISPIN_NUM("experiment", "trace_duration", experiment.trace_duration);
  BISPIN_NUM("experiment", "trace_dt", experiment.trace_dt);
  BISPIN_INT("experiment", "zero_pad", experiment.zero_pad);
  BISPIN_NUM("experiment", "cpmg_tau", experiment.cpmg.tau);
  BISPIN_INT("experiment", "cpmg_echoes", experiment.cpmg.n_echoes);
  t["experiment"]["line_shape"] = [](RunConfig& c, const std::string& v) {
    c.experiment.line_shape = wrap_enum("experiment", "line_shape", v, parse_line_shape);
  };
  t["experiment"]["normalization"] = [](RunConfig& c, const std::string& v) {
    c.experiment.normalization = wrap_enum("experiment", "normalization", v, parse_normalization);
  };

  t["output"]["dir"] = [](RunConfig& c, const std::string& v) { c.output_dir = v; };
#undef BISPIN_NUM
#undef BISPIN_INT
  return t;
}

}  // namespace

IniDocument parse_ini(std::istream& in, const std::string& source) {
  IniDocument doc;
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << source << ":" << number << ": " << what;
      throw DataError(msg.str());
    };
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail("empty section name");
      doc.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail("empty key");
    auto& sec = doc.sections[section];
    if (sec.count(key)) fail("duplicate key '" + key + "'");
    sec[key] = value;
  }
  return doc;
}

void RunConfig::validate() const {
  try {
    spin.validate();
    geometry.validate();
    drive.validate();
    if (n_lateral < 1 || n_depth < 1) throw InvalidArgument("implant grid counts must be >= 1");
    if (!(implant.strip_width > 0)) throw InvalidArgument("implant strip_width must be positive");
    if (!(implant.depth_min >= 0) || !(implant.depth_max > implant.depth_min)) {
      throw InvalidArgument("implant depths must satisfy 0 <= depth_min < depth_max");
    }
    const double xc = std::abs(implant.center_x(geometry));
    const double a = geometry.half_center();
    const double b = a + geometry.gap_width;
    if (xc - 0.5 * implant.strip_width <= a || xc + 0.5 * implant.strip_width >= b) {
      throw InvalidArgument("implant region overlaps a conductor footprint");
    }
    if (!(experiment.excitation_freq > 0) || !(experiment.window > 0) || !(experiment.linewidth > 0) ||
        !(experiment.trace_dt > 0) || !(experiment.trace_duration > 0) || experiment.zero_pad < 1 ||
        experiment.cpmg.n_echoes < 1 || !(experiment.field_B0 >= 0) || !(experiment.min_mel >= 0)) {
      throw InvalidArgument("experiment parameters out of range");
    }
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
}

RunConfig config_from_ini(const IniDocument& doc) {
  const auto table = setters();
  RunConfig c;
  bool g_drive_given = false;
  for (const auto& [section, keys] : doc.sections) {
    const auto sec = table.find(section);
    if (sec == table.end()) throw DataError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) {
        throw DataError("config: unknown key '" + key + "' in [" + section + "]");
      }
      it->second(c, value);
      if (section == "drive" && key == "g_drive") g_drive_given = true;
    }
  }
  if (!g_drive_given) c.drive.g_drive = c.spin.g_electron;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  return config_from_ini(parse_ini(in, path.string()));
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&](const char* key, double v) { o << key << " = " << format_double(v) << "\n"; };
  o << "[spin]\n";
  kv("electron_spin", c.spin.electron_spin);
  kv("nuclear_spin", c.spin.nuclear_spin);
  kv("hyperfine_A", c.spin.hyperfine_A);
  kv("g_electron", c.spin.g_electron);
  kv("gyromag_nuclear", c.spin.gyromag_nuclear);
  kv("bohr_magneton", c.spin.constants.bohr_magneton);
  kv("planck_h", c.spin.constants.planck_h);
  o << "\n[geometry]\n";
  kv("center_width", c.geometry.center_width);
  kv("gap_width", c.geometry.gap_width);
  kv("ground_width", c.geometry.ground_width);
  kv("film_thickness", c.geometry.film_thickness);
  kv("drive_current", c.geometry.drive_current_total);
  o << "current_profile = " << to_string(c.geometry.profile) << "\n";
  o << "filaments_per_strip = " << c.geometry.filaments_per_strip << "\n";
  o << "\n[implant]\n";
  kv("strip_width", c.implant.strip_width);
  kv("strip_length", c.implant.strip_length);
  kv("depth_min", c.implant.depth_min);
  kv("depth_max", c.implant.depth_max);
  if (c.implant.lateral_center) kv("lateral_center", *c.implant.lateral_center);
  o << "gap = " << (c.implant.side == GapSide::Positive ? "positive" : "negative") << "\n";
  o << "n_lateral = " << c.n_lateral << "\n";
  o << "n_depth = " << c.n_depth << "\n";
  o << "\n[drive]\n";
  kv("b1_dielectric", c.drive.b1_dielectric);
  kv("b1_cpw_scale", c.drive.b1_cpw_scale);
  kv("phase", c.drive.phase_phi);
  kv("tau_pi", c.drive.tau_pi);
  kv("g_drive", c.drive.g_drive);
  o << "rabi_weighting = " << (c.rabi_weighting ? "matrix_element" : "bare") << "\n";
  o << "\n[experiment]\n";
  kv("excitation_freq", c.experiment.excitation_freq);
  kv("field", c.experiment.field_B0);
  kv("window", c.experiment.window);
  kv("min_mel", c.experiment.min_mel);
  kv("linewidth", c.experiment.linewidth);
  o << "line_shape = " << to_string(c.experiment.line_shape) << "\n";
  kv("trace_duration", c.experiment.trace_duration);
  kv("trace_dt", c.experiment.trace_dt);
  o << "zero_pad = " << c.experiment.zero_pad << "\n";
  kv("cpmg_tau", c.experiment.cpmg.tau);
  o << "cpmg_echoes = " << c.experiment.cpmg.n_echoes << "\n";
  o << "normalization = " << to_string(c.experiment.normalization) << "\n";
  o << "\n[output]\ndir = " << c.output_dir.string() << "\n";
  return o.str();
}

}  // namespace bispin
