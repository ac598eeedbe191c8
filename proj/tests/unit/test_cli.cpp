// Copyright 2026 The QCPMD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qcpmd/cli.hpp"
#include "temp_dir.hpp"

namespace qcpmd::cli {
namespace {

using io::RunConfig;
using qcpmd::testing::kH2Geometry;
using qcpmd::testing::slurp;
using qcpmd::testing::TempDir;

RunConfig h2_config(const fs::path& out, std::uint64_t n_steps, json extra = json::object()) {
    json j{{"geometry", json::parse(kH2Geometry)},
           {"n_steps", n_steps},
           {"output_dir", out.string()},
           {"estimation", {{"seed", 3}}},
           {"analysis", {{"discard_fs", 0.5}}}};
    j.merge_patch(extra);
    return RunConfig::from_json(j);
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

TEST(CmdRun, ZeroStepsWritesHeaderAndInitialFrame) {
    TempDir dir;
    std::ostringstream log;
    const auto r = cmd_run(h2_config(dir / "run", 0), log);
    EXPECT_EQ(r.steps_completed, 0U);
    EXPECT_EQ(line_count(slurp(dir / "run/trajectory.csv")), 2U);
    const json meta = io::read_json_file(dir / "run/metadata.json");
    EXPECT_EQ(meta["status"], "completed");
    EXPECT_EQ(meta["ansatz"]["n_parameters"], 12);
    EXPECT_NEAR(meta["init"]["energy_hartree"].get<double>(), meta["init"]["fci_energy_hartree"].get<double>(), 1e-8);
    EXPECT_TRUE(fs::exists(dir / "run/summary.json"));
    EXPECT_TRUE(fs::exists(dir / "run/trajectory.schema.json"));
}

TEST(CmdRun, SameSeedGivesByteIdenticalTrajectoryForAnyThreadCount) {
    TempDir dir;
    std::ostringstream log;
    (void)cmd_run(h2_config(dir / "a", 150), log);
    (void)cmd_run(h2_config(dir / "b", 150), log);
    (void)cmd_run(h2_config(dir / "c", 150, {{"estimation", {{"threads", 3}}}}), log);
    const auto a = slurp(dir / "a/trajectory.csv");
    EXPECT_EQ(line_count(a), 152U);
    EXPECT_EQ(a, slurp(dir / "b/trajectory.csv"));
    EXPECT_EQ(a, slurp(dir / "c/trajectory.csv"));
    (void)cmd_run(h2_config(dir / "d", 150, {{"estimation", {{"seed", 4}}}}), log);
    EXPECT_NE(a, slurp(dir / "d/trajectory.csv"));
}

TEST(CmdRun, MetadataReproducesTheRun) {
    TempDir dir;
    std::ostringstream log;
    (void)cmd_run(h2_config(dir / "a", 60, {{"stride", 7}}), log);
    const auto again = io::load_config(dir / "a/metadata.json", {{"output_dir", (dir / "b").string()}});
    (void)cmd_run(again, log);
    EXPECT_EQ(slurp(dir / "a/trajectory.csv"), slurp(dir / "b/trajectory.csv"));
    EXPECT_EQ(line_count(slurp(dir / "a/trajectory.csv")), 1U + 9U); // steps 0, 7, ..., 56
}

TEST(CmdRun, LedgerAndSummaryArtifacts) {
    TempDir dir;
    std::ostringstream log;
    // No discard: the 101-frame window clears the histogram minimum.
    const auto r = cmd_run(h2_config(dir / "run", 100, {{"analysis", {{"discard_fs", 0.0}}}}), log);
    EXPECT_DOUBLE_EQ(r.ledger.circuits_per_step, 686.0);
    EXPECT_EQ(line_count(slurp(dir / "run/ledger_per_step.csv")), 101U);
    const json s = io::read_json_file(dir / "run/summary.json");
    EXPECT_TRUE(s.contains("kinetic_temperature_K"));
    EXPECT_TRUE(s.contains("parameter_temperature_K"));
    EXPECT_TRUE(s["bond_length"].contains("tv_vs_fci_reference"));
    EXPECT_NEAR(s["fci_reference"]["bond_angstrom"].get<double>(), 0.735, 0.005);
    EXPECT_TRUE(fs::exists(dir / "run/bond_histogram.csv"));
}

TEST(CmdRun, VqeMdCostsMoreThanQcpmd) {
    TempDir dir;
    std::ostringstream log;
    const auto q = cmd_run(h2_config(dir / "q", 20), log);
    const auto v = cmd_run(h2_config(dir / "v", 20, {{"method", "vqe-md"}}), log);
    EXPECT_GT(v.ledger.shots_per_step, q.ledger.shots_per_step);
    EXPECT_GT(v.ledger.circuits_per_step, q.ledger.circuits_per_step);
}

TEST(CmdRun, AbortKeepsThePartialTrajectoryAndRecordsTheFailure) {
    TempDir dir;
    std::ostringstream log;
    // A 50 fs step breaks the friction stability bound at the first update.
    EXPECT_THROW((void)cmd_run(h2_config(dir / "run", 10, {{"dt_fs", 50.0}}), log), NumericalAbort);
    EXPECT_EQ(line_count(slurp(dir / "run/trajectory.csv")), 2U);
    const json meta = io::read_json_file(dir / "run/metadata.json");
    EXPECT_EQ(meta["status"].get<std::string>().rfind("aborted", 0), 0U);
    EXPECT_EQ(exit_code(NumericalAbort("x")), kExitNumerical);
    EXPECT_EQ(exit_code(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code(ConvergenceError("x")), kExitFailure);
}

/// Exact Boltzmann samples of a harmonic H2 bond written as a trajectory.
fs::path synthetic_harmonic(const TempDir& dir, double wavenumber, std::size_t frames) {
    io::TrajectorySchema schema;
    schema.n_coordinates = 6;
    schema.masses.assign(6, 1837.15);
    schema.temperature_K = 70.0;
    schema.dt_fs = 0.01;
    const double mu = 1837.15 / 2.0;
    const double omega = units::wavenumber_to_angular(wavenumber);
    const double beta = units::beta_from_kelvin(70.0);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> q(0.0, 1.0 / std::sqrt(beta * mu * omega * omega));
    std::normal_distribution<double> p(0.0, 1.0 / std::sqrt(beta * 1837.15));
    const fs::path csv = dir / "trajectory.csv";
    io::TrajectoryWriter w(csv, schema);
    for (std::size_t k = 0; k < frames; ++k) {
        Frame f;
        f.step = k;
        f.time = units::fs_to_atu(0.01 * static_cast<double>(k));
        f.R = Eigen::VectorXd::Zero(6);
        f.R[5] = 1.4 + q(rng);
        f.v = Eigen::VectorXd::Zero(6);
        f.v[2] = p(rng);
        f.v[5] = p(rng);
        f.theta = f.xi = Eigen::VectorXd(0);
        f.force = f.force_variance = Eigen::VectorXd::Zero(6);
        w.write(f);
    }
    return csv;
}

TEST(CmdAnalyze, SyntheticHarmonicTrajectoryRecoversTheGenerator) {
    TempDir dir;
    const fs::path csv = synthetic_harmonic(dir, 4500.0, 100000);
    AnalyzeOptions opts;
    opts.discard_fs = 10.0;
    std::ostringstream out;
    const auto r = cmd_analyze(csv, opts, out);
    ASSERT_EQ(r.report.frequencies.size(), 1U);
    EXPECT_NEAR(r.report.frequencies[0], 4500.0, 0.02 * 4500.0);
    EXPECT_GT(r.report.standard_errors[0], 0.0);
    EXPECT_NE(out.str().find("jackknife SE"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "frequency_report.json"));
    EXPECT_TRUE(fs::exists(dir / "bond_histogram.csv"));
    EXPECT_LT(r.document["bond_length"]["fit"]["tv_distance"].get<double>(), 0.02);
    // Velocities were drawn at 70 K along the bond axis.
    EXPECT_NEAR(r.document["kinetic_temperature_K"]["vibration_K"].get<double>(), 70.0, 2.0);
}

TEST(CmdAnalyze, DiscardCoveringTheTrajectoryIsAWindowError) {
    TempDir dir;
    const fs::path csv = synthetic_harmonic(dir, 4500.0, 200);
    AnalyzeOptions opts;
    opts.discard_fs = 5.0;
    std::ostringstream out;
    try {
        (void)cmd_analyze(csv, opts, out);
        FAIL() << "expected a window error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
    }
    EXPECT_THROW((void)cmd_analyze(dir / "absent.csv", {}, out), ConfigError);
}

TEST(CmdAnalyze, RunThenAnalyzeIsAPureFunctionOfConfig) {
    TempDir dir;
    std::ostringstream log;
    (void)cmd_run(h2_config(dir / "a", 300), log);
    (void)cmd_run(h2_config(dir / "b", 300), log);
    AnalyzeOptions opts;
    opts.discard_fs = 0.5;
    const auto ra = cmd_analyze(dir / "a/trajectory.csv", opts, log);
    const auto rb = cmd_analyze(dir / "b/trajectory.csv", opts, log);
    EXPECT_EQ(ra.report.frequencies, rb.report.frequencies);
    EXPECT_EQ(slurp(dir / "a/frequency_report.json").size(), slurp(dir / "b/frequency_report.json").size());
    ASSERT_TRUE(ra.reference.has_value());
}

TEST(CmdScan, CurveMinimumAndSinglePointGrid) {
    TempDir dir;
    const auto geom = chem::MolecularGeometry::from_json(json::parse(kH2Geometry));
    std::ostringstream log;
    std::vector<double> grid;
    for (double r = 0.5; r <= 1.2001; r += 0.05) {
        grid.push_back(r);
    }
    const auto r = cmd_scan(geom, grid, dir / "scan", log);
    ASSERT_TRUE(r.reference.has_value());
    EXPECT_NEAR(units::bohr_to_angstrom(r.reference->bond), 0.735, 0.005);
    EXPECT_EQ(line_count(slurp(dir / "scan/potential_curve.csv")), grid.size() + 1);

    const auto one = cmd_scan(geom, {0.74}, dir / "one", log);
    EXPECT_EQ(line_count(slurp(dir / "one/potential_curve.csv")), 2U);
    EXPECT_FALSE(one.reference.has_value());
    EXPECT_TRUE(io::read_json_file(dir / "one/harmonic_reference.json").contains("error"));
    EXPECT_THROW((void)cmd_scan(geom, {0.8, 0.7}, dir / "bad", log), ConfigError);
}

TEST(CmdForceHistogram, ShotNoiseScalingAndDegenerateExactMode) {
    TempDir dir;
    std::ostringstream log;
    const auto cfg = h2_config(dir / "fh", 0);
    const auto r = cmd_force_histogram(cfg, {51, 816}, 2000, log);
    ASSERT_EQ(r.entries.size(), 2U);
    const double ratio = r.entries[0].fit->std / r.entries[1].fit->std;
    EXPECT_NEAR(ratio, 4.0, 0.15 * 4.0);
    for (const auto& e : r.entries) {
        EXPECT_NEAR(e.fit->mean, r.exact_force, 5.0 * e.fit->std / std::sqrt(2000.0));
    }
    EXPECT_TRUE(fs::exists(dir / "fh/force_histogram_n816.csv"));

    const auto exact = h2_config(dir / "ex", 0, {{"estimation", {{"mode", "exact"}}}});
    const auto d = cmd_force_histogram(exact, {51}, 100, log);
    EXPECT_TRUE(d.entries[0].degenerate);
    EXPECT_EQ(d.entries[0].samples.front(), r.exact_force);
    EXPECT_THROW((void)cmd_force_histogram(cfg, {51}, 99, log), ConfigError);
}

TEST(CmdForceHistogram, TvDoesNotGrowWithRepetitions) {
    TempDir dir;
    std::ostringstream log;
    const auto cfg = h2_config(dir / "fh", 0);
    const double small = cmd_force_histogram(cfg, {3276}, 500, log).entries[0].fit->tv_distance;
    const double large = cmd_force_histogram(cfg, {3276}, 8000, log).entries[0].fit->tv_distance;
    EXPECT_LE(large, small + 0.01);
}

} // namespace
} // namespace qcpmd::cli
