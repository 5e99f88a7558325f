// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/cli.hpp"
#include "bispin/csv.hpp"
#include "bispin/echo_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

using namespace bispin;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("bispin_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, const fs::path& out = {}) {
    std::vector<std::string> full{"bispin", "--out", (out.empty() ? dir_ : out).string()};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream o, e;
    const int code = run_cli(full, o, e);
    stdout_ = o.str();
    stderr_ = e.str();
    return code;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << text;
    return dir_ / name;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::map<std::string, std::string> report(const fs::path& p) {
    std::map<std::string, std::string> out;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
  }

  fs::path dir_;
  std::string stdout_, stderr_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"clock", "--transition", "sideways"}), kExitUsage);
  EXPECT_EQ(run({"breit-rabi", "--n-points", "1"}), kExitUsage);
  EXPECT_EQ(run({"phase-sweep", "--normalize", "max"}), kExitUsage);
  EXPECT_EQ(run({"fit"}), kExitUsage);
}

TEST_F(CliTest, BreitRabiTable) {
  ASSERT_EQ(run({"breit-rabi"}), kExitOk) << stderr_;
  const CsvTable t = read_csv(dir_ / "breit_rabi.csv");
  EXPECT_EQ(t.rows.size(), 201u);
  EXPECT_EQ(t.header.size(), 21u);
  EXPECT_EQ(t.header[0], "B0_T");
  EXPECT_EQ(t.header[1], "E_5_+5_Hz");
  EXPECT_NO_THROW(t.column("E_4_-4_Hz"));
  EXPECT_EQ(t.rows.front()[0], 0.0);
  EXPECT_DOUBLE_EQ(t.rows.back()[0], 0.2);
  ASSERT_EQ(run({"breit-rabi", "--b-min", "0.01", "--b-max", "0.02", "--n-points", "2"}), kExitOk);
  EXPECT_EQ(read_csv(dir_ / "breit_rabi.csv").rows.size(), 2u);
}

TEST_F(CliTest, OutputIsByteIdenticalAcrossRuns) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run({"transitions"}, a), kExitOk);
  ASSERT_EQ(run({"transitions"}, b), kExitOk);
  EXPECT_EQ(slurp(a / "transitions.csv"), slurp(b / "transitions.csv"));
  ASSERT_EQ(run({"phase-sweep"}, a), kExitOk);
  ASSERT_EQ(run({"phase-sweep"}, b), kExitOk);
  EXPECT_EQ(slurp(a / "phase_sweep.csv"), slurp(b / "phase_sweep.csv"));
}

TEST_F(CliTest, TransitionsAtWorkingPoint) {
  ASSERT_EQ(run({"transitions"}), kExitOk) << stderr_;
  const CsvTable t = read_csv(dir_ / "transitions.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  const std::size_t f = t.column("freq_Hz");
  EXPECT_NEAR(t.rows[1][f] - t.rows[0][f], 699e3, 5e3);
  EXPECT_EQ(t.rows[0][t.column("mF_up")], -1.0);
  EXPECT_EQ(t.rows[1][t.column("mF_up")], -2.0);
}

TEST_F(CliTest, ClockReportAndBadBracket) {
  ASSERT_EQ(run({"clock", "--b-low", "0.06", "--b-high", "0.1"}), kExitOk) << stderr_;
  auto r = report(dir_ / "clock.txt");
  EXPECT_NEAR(std::stod(r["field_Bct_T"]), 79.97e-3, 0.05e-3);
  EXPECT_NEAR(std::stod(r["frequency_fct_Hz"]), 7.0328e9, 0.5e6);
  const fs::path fresh = dir_ / "fresh";
  EXPECT_EQ(run({"clock", "--b-low", "0.2", "--b-high", "0.3"}, fresh), kExitNumerical);
  EXPECT_FALSE(fs::exists(fresh / "clock.txt"));
  EXPECT_EQ(run({"clock", "--upper", "5,-1"}), kExitUsage);
  EXPECT_EQ(run({"clock", "--upper", "5,x", "--lower", "4,-2"}), kExitUsage);
}

TEST_F(CliTest, FieldmapStats) {
  ASSERT_EQ(run({"fieldmap"}), kExitOk) << stderr_;
  auto r = report(dir_ / "fieldmap_stats.txt");
  EXPECT_EQ(r["n_samples"], "256");
  EXPECT_NEAR(std::stod(r["relative_std"]), 0.14429975636658446, 1e-9);
  EXPECT_EQ(read_csv(dir_ / "fieldmap.csv").rows.size(), 256u);
}

TEST_F(CliTest, PhaseSweepRowsSumToOne) {
  ASSERT_EQ(run({"phase-sweep"}), kExitOk) << stderr_;
  const CsvTable t = read_csv(dir_ / "phase_sweep.csv");
  ASSERT_EQ(t.rows.size(), 25u);
  for (const auto& row : t.rows) EXPECT_NEAR(row[1] + row[2], 1.0, 1e-12);
  EXPECT_NEAR(t.rows[0][1], 9.9748823390517416e-01, 1e-12);
  EXPECT_NEAR(t.rows[1][2], 1.3985888929706265e-02, 1e-12);
  auto meta = report(dir_ / "phase_sweep_meta.txt");
  EXPECT_EQ(meta["allowed_sense"], "counterclockwise");
  EXPECT_EQ(meta["allowed_helicity"], "sigma-");
}

TEST_F(CliTest, FitRoundTrip) {
  const auto samples = sample_donors(CPWGeometry{}, ImplantRegion{}, 32, 8);
  const auto g = phase_grid(19);
  const FitParams truth{1.5e-4, 1.25e-2, -0.4, 0};
  const auto curve = model_curve(g, samples, FitFixed{}, truth, Pairing{});
  CsvWriter w({"phi_rad", "e_forbidden", "e_allowed"});
  // Unnormalized on disk; the command normalizes per point.
  for (const auto& p : curve) w.add_row({p.phi, 3 * p.e_forbidden, 3 * p.e_allowed});
  const fs::path data = write("data.csv", w.text());
  ASSERT_EQ(run({"fit", "--data", data.string()}), kExitOk) << stderr_;
  auto r = report(dir_ / "fit_report.txt");
  EXPECT_NEAR(std::stod(r["b1_dielectric_T"]), 1.5e-4, 1e-8);
  EXPECT_NEAR(std::stod(r["b1_cpw_scale"]), 1.25e-2, 1e-6);
  EXPECT_NEAR(std::stod(r["phase_offset_rad"]), -0.4, 1e-4);
  EXPECT_EQ(r["improved"], "true");
  EXPECT_EQ(read_csv(dir_ / "fit_residuals.csv").rows.size(), 19u);
}

TEST_F(CliTest, FitDataErrors) {
  const fs::path missing = write("missing.csv", "phi_rad,e_forbidden\n0,1\n");
  EXPECT_EQ(run({"fit", "--data", missing.string()}), kExitData);
  EXPECT_NE(stderr_.find("e_allowed"), std::string::npos);
  const fs::path empty = write("empty.csv", "");
  EXPECT_EQ(run({"fit", "--data", empty.string()}), kExitData);
  const fs::path bad = write("bad.csv", "phi_rad,e_forbidden,e_allowed\n0,1,0\n1,abc,0\n");
  EXPECT_EQ(run({"fit", "--data", bad.string()}), kExitData);
  EXPECT_NE(stderr_.find("line 3"), std::string::npos);
  EXPECT_EQ(run({"fit", "--data", (dir_ / "nope.csv").string()}), kExitData);
  EXPECT_FALSE(fs::exists(dir_ / "fit_report.txt"));
}

TEST_F(CliTest, SpectrumAtWorkingPoint) {
  ASSERT_EQ(run({"spectrum"}), kExitOk) << stderr_;
  auto r = report(dir_ / "peaks.txt");
  EXPECT_NEAR(std::stod(r["separation_Hz"]), 660e3, 60e3);
  EXPECT_NEAR(std::stod(r["peak1_fwhm_Hz"]), 300e3, 30e3);
  EXPECT_NEAR(std::stod(r["peak2_fwhm_Hz"]), 300e3, 30e3);
  EXPECT_EQ(r["peak1_assignment"], "allowed");
  EXPECT_EQ(r["peak2_assignment"], "forbidden");
  EXPECT_EQ(read_csv(dir_ / "trace.csv").rows.size(), 400u);
}

TEST_F(CliTest, SpectrumLinearDriveGivesEqualLines) {
  const fs::path cfg = write("linear.ini", "[drive]\nb1_dielectric = 0\n");
  std::vector<std::string> args{"bispin", "--config", cfg.string(), "--out", dir_.string(), "spectrum"};
  std::ostringstream o, e;
  ASSERT_EQ(run_cli(args, o, e), kExitOk) << e.str();
  auto r = report(dir_ / "peaks.txt");
  EXPECT_NEAR(std::stod(r["peak1_height"]) / std::stod(r["peak2_height"]), 1.0, 0.01);
}

TEST_F(CliTest, SpectrumWithoutDoubletFailsCleanly) {
  const fs::path fresh = dir_ / "fresh";
  EXPECT_EQ(run({"spectrum", "--field", "0.005"}, fresh), kExitNumerical);
  EXPECT_NE(stderr_.find("found"), std::string::npos);
  EXPECT_FALSE(fs::exists(fresh / "peaks.txt"));
  EXPECT_FALSE(fs::exists(fresh / "trace.csv"));
  EXPECT_FALSE(fs::exists(fresh / "spectrum.csv"));
}

TEST_F(CliTest, BadConfigIsDataError) {
  const fs::path cfg = write("bad.ini", "[spin]\nwhat = 1\n");
  std::vector<std::string> args{"bispin", "--config", cfg.string(), "fieldmap"};
  std::ostringstream o, e;
  EXPECT_EQ(run_cli(args, o, e), kExitData);
  EXPECT_NE(e.str().find("unknown key"), std::string::npos);
}

TEST_F(CliTest, ExecutableExitCodes) {
  const std::string exe = BISPIN_CLI_PATH;
  const std::string out = (dir_ / "exe").string();
  EXPECT_EQ(std::system((exe + " --out " + out + " fieldmap > /dev/null").c_str()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "exe" / "fieldmap_stats.txt"));
  const int code = std::system((exe + " --out " + out + " spectrum --field 0.005 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(code));
  EXPECT_EQ(WEXITSTATUS(code), kExitNumerical);
  const int usage = std::system((exe + " bogus 2> /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(usage), kExitUsage);
}
