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
// qcpmd command-line driver. Subcommands: run, analyze, scan, force-histogram.
// Flags override the matching config keys. Exit status: 0 success, 2 bad
// configuration, 3 numerical abort, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcpmd/cli.hpp"
#include "qcpmd/io.hpp"

namespace {

using nlohmann::json;
using qcpmd::cli::kExitConfig;

/// Flags shared by commands that load a run config; unset flags leave the config alone.
struct ConfigFlags {
    std::string config;
    std::optional<std::string> method, thermostat, friction, mode, sampling, output_dir;
    std::optional<std::uint64_t> n_steps, seed, n_shot, stride;
    std::optional<unsigned> threads;
    std::optional<std::size_t> depth, jackknife_bins;
    std::optional<double> dt_fs, temperature_K, mu_hartree_fs2, discard_fs;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "run config JSON (or metadata.json of a previous run)")
            ->required()
            ->check(CLI::ExistingFile);
        app->add_option("--method", method, "qcpmd | vqe-md");
        app->add_option("--n-steps", n_steps);
        app->add_option("--dt-fs", dt_fs);
        app->add_option("--temperature-K", temperature_K);
        app->add_option("--mu-hartree-fs2", mu_hartree_fs2, "uniform virtual mass");
        app->add_option("--thermostat", thermostat, "fdt | off");
        app->add_option("--friction", friction, "covariance | diagonal");
        app->add_option("--stride", stride);
        app->add_option("--depth", depth, "ansatz depth");
        app->add_option("--seed", seed, "estimation seed");
        app->add_option("--n-shot", n_shot);
        app->add_option("--mode", mode, "sampled | exact");
        app->add_option("--sampling", sampling, "parity | literal");
        app->add_option("--threads", threads);
        app->add_option("--discard-fs", discard_fs);
        app->add_option("--jackknife-bins", jackknife_bins);
        app->add_option("--output-dir", output_dir);
    }

    [[nodiscard]] json overrides() const {
        json j = json::object();
        const auto put = [](json& at, const char* key, const auto& v) {
            if (v) {
                at[key] = *v;
            }
        };
        put(j, "method", method);
        put(j, "n_steps", n_steps);
        put(j, "dt_fs", dt_fs);
        put(j, "temperature_K", temperature_K);
        put(j, "mu_hartree_fs2", mu_hartree_fs2);
        put(j, "thermostat", thermostat);
        put(j, "friction", friction);
        put(j, "stride", stride);
        put(j, "output_dir", output_dir);
        json ansatz = json::object();
        put(ansatz, "depth", depth);
        json est = json::object();
        put(est, "seed", seed);
        put(est, "n_shot", n_shot);
        put(est, "mode", mode);
        put(est, "sampling", sampling);
        put(est, "threads", threads);
        json an = json::object();
        put(an, "discard_fs", discard_fs);
        put(an, "jackknife_bins", jackknife_bins);
        for (auto& [key, sub] : {std::pair<const char*, json*>{"ansatz", &ansatz}, {"estimation", &est},
                                 {"analysis", &an}}) {
            if (!sub->empty()) {
                j[key] = *sub;
            }
        }
        return j;
    }

    [[nodiscard]] qcpmd::io::RunConfig load() const { return qcpmd::io::load_config(config, overrides()); }
};

std::vector<double> bond_grid(const std::vector<double>& bonds, std::optional<double> from, std::optional<double> to,
                              std::size_t points) {
    if (!bonds.empty()) {
        return bonds;
    }
    if (!from || !to) {
        throw qcpmd::ConfigError("scan: give --bonds or both --from and --to");
    }
    if (points < 1) {
        throw qcpmd::ConfigError("scan: --points must be >= 1");
    }
    std::vector<double> grid(points, *from);
    for (std::size_t i = 1; i < points; ++i) {
        grid[i] = *from + (*to - *from) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Langevin molecular dynamics with shot-noise forces from a simulated variational circuit"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    auto* run = app.add_subcommand("run", "run QCPMD or VQE-MD dynamics from a config");
    run_flags.attach(run);

    std::string traj_path;
    qcpmd::cli::AnalyzeOptions analyze_opts;
    std::optional<std::string> analyze_out;
    auto* analyze = app.add_subcommand("analyze", "vibrational frequencies and histograms of a stored trajectory");
    analyze->add_option("trajectory", traj_path, "trajectory.csv")->required();
    analyze->add_option("--discard-fs", analyze_opts.discard_fs, "equilibration span to drop");
    analyze->add_option("--jackknife-bins", analyze_opts.jackknife_bins);
    analyze->add_option("--output-dir", analyze_out, "defaults to the trajectory's directory");

    std::string scan_geometry;
    std::vector<double> scan_bonds;
    std::optional<double> scan_from, scan_to;
    std::size_t scan_points = 45;
    std::string scan_out = "scan";
    auto* scan = app.add_subcommand("scan", "RHF and FCI potential curve of a diatomic");
    scan->add_option("--geometry", scan_geometry, "geometry JSON")->required()->check(CLI::ExistingFile);
    scan->add_option("--bonds", scan_bonds, "bond lengths in angstrom")->delimiter(',');
    scan->add_option("--from", scan_from, "first bond length, angstrom");
    scan->add_option("--to", scan_to, "last bond length, angstrom");
    scan->add_option("--points", scan_points, "grid size for --from/--to");
    scan->add_option("--output-dir", scan_out);

    ConfigFlags fh_flags;
    std::vector<std::uint64_t> fh_shots{51, 204, 3276};
    std::uint64_t fh_reps = 10000;
    auto* fh = app.add_subcommand("force-histogram", "distribution of repeated force estimates at the initial geometry");
    fh_flags.attach(fh);
    fh->add_option("--shots", fh_shots, "n_shot values")->delimiter(',');
    fh->add_option("--repetitions", fh_reps);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            qcpmd::cli::cmd_run(run_flags.load(), std::cout);
        } else if (*analyze) {
            if (analyze_out) {
                analyze_opts.output_dir = qcpmd::io::resolve_output(*analyze_out);
            }
            qcpmd::cli::cmd_analyze(traj_path, analyze_opts, std::cout);
        } else if (*scan) {
            const auto geom = qcpmd::chem::MolecularGeometry::from_json(qcpmd::io::read_json_file(scan_geometry));
            qcpmd::cli::cmd_scan(geom, bond_grid(scan_bonds, scan_from, scan_to, scan_points),
                                 qcpmd::io::resolve_output(scan_out), std::cout);
        } else if (*fh) {
            qcpmd::cli::cmd_force_histogram(fh_flags.load(), fh_shots, fh_reps, std::cout);
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qcpmd::cli::exit_code(e);
    }
    return qcpmd::cli::kExitOk;
}
