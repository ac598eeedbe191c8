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
/**
 * @file cli.hpp
 * Experiment commands behind the qcpmd executable: run, analyze, scan and
 * force-histogram. Each command reads a validated configuration, writes its
 * artifacts into an output directory and returns a small result record.
 * Errors propagate as qcpmd exceptions; exit_code() maps them to statuses.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcpmd/analysis.hpp"
#include "qcpmd/chem/hamiltonian.hpp"
#include "qcpmd/chem/potential.hpp"
#include "qcpmd/dynamics.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/estimator.hpp"
#include "qcpmd/io.hpp"
#include "qcpmd/operator.hpp"
#include "qcpmd/qsim.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Exit status for an exception escaping a command.
inline int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) {
        return kExitConfig;
    }
    if (dynamic_cast<const NumericalAbort*>(&e) != nullptr) {
        return kExitNumerical;
    }
    return kExitFailure;
}

inline void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

/// Histogram as plot-ready CSV: bin edges, counts, empirical and fitted densities.
inline void write_histogram_csv(const fs::path& path, const analysis::GaussianFit& fit) {
    const auto& h = fit.histogram;
    std::string text = "bin_lo,bin_hi,count,density,fitted_density\n";
    const double n = static_cast<double>(fit.samples);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double width = h.edges[i + 1] - h.edges[i];
        io::append_number(text, h.edges[i]);
        text += ',';
        io::append_number(text, h.edges[i + 1]);
        text += ',';
        io::append_number(text, static_cast<std::uint64_t>(h.counts[i]));
        text += ',';
        io::append_number(text, static_cast<double>(h.counts[i]) / (n * width));
        text += ',';
        io::append_number(text, h.fitted_mass[i] / width);
        text += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

/// Ansatz for a molecule: brick layout on the Jordan-Wigner register, Hartree-Fock reference.
inline AnsatzCircuit molecular_ansatz(const chem::MolecularModel& model, const chem::MolecularGeometry& geom,
                                      std::size_t depth) {
    return AnsatzCircuit::brick(model.n_qubits(), depth,
                                AnsatzCircuit::lowest_occupation(static_cast<std::size_t>(geom.n_electrons())));
}

inline Eigen::VectorXd to_vector(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline json init_to_json(const InitResult& r, double fci) {
    return {{"theta", std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size())},
            {"energy_hartree", r.energy},
            {"fci_energy_hartree", fci},
            {"gradient_norm", r.gradient_norm},
            {"start_index", r.start_index}};
}

inline json unit_conventions() {
    return {{"internal", "hartree, bohr, electron mass, atomic time unit"},
            {"angstrom_per_bohr", units::kAngstromPerBohr},
            {"fs_per_atu", units::kFsPerAtu},
            {"electron_masses_per_amu", units::kElectronMassPerAmu},
            {"boltzmann_hartree_per_K", units::kBoltzmann},
            {"wavenumber_per_hartree", units::kWavenumberPerHartree},
            {"mu", "configured in hartree fs^2, converted with fs_per_atu^2"}};
}

/// Choices that differ from a literal reading of the method description.
inline std::vector<std::string> method_deviations() {
    return {"ansatz gate is the real exchange gate [[c, s], [s, -c]], not a Givens rotation, so the D=4 brick "
            "circuit reaches the FCI ground state of H2/STO-3G",
            "nuclear forces use central finite differences of the Hamiltonian coefficients",
            "thermostat friction uses the full force covariance matrix (diagonal is selectable)",
            "histogram TV distance uses Sturges bins over the sample range and counts Gaussian mass outside it",
            "VQE-MD warm-starts BFGS from the previous step's parameters"};
}

/// FCI harmonic reference for a diatomic, bracketing the minimum around the configured bond.
inline std::optional<chem::HarmonicReference> diatomic_reference(const chem::MolecularGeometry& geom) {
    if (geom.size() != 2) {
        return std::nullopt;
    }
    const double r0 = chem::distance(geom.atoms()[0].position, geom.atoms()[1].position);
    try {
        return chem::fci_harmonic_reference(geom, 0.7 * r0, 1.5 * r0);
    } catch (const Error&) {
        return std::nullopt;
    }
}

inline json reference_to_json(const chem::HarmonicReference& ref) {
    return {{"bond_angstrom", units::bohr_to_angstrom(ref.bond)},
            {"energy_hartree", ref.energy},
            {"curvature_hartree_per_bohr2", ref.curvature},
            {"reduced_mass_me", ref.reduced_mass},
            {"wavenumber_cm-1", ref.wavenumber}};
}

/// Equilibrium statistics of a trajectory window, as stored in summary.json and frequency_report.json.
struct WindowStatistics {
    json summary = json::object();
    std::optional<analysis::FrequencyReport> frequencies;
    std::optional<analysis::GaussianFit> bond_fit;
};

inline WindowStatistics window_statistics(const analysis::Trajectory& traj, double discard_fs, std::size_t bins,
                                          double temperature_K, const std::optional<chem::HarmonicReference>& ref) {
    WindowStatistics out;
    json& s = out.summary;
    const analysis::Window w = analysis::window_after(traj, units::fs_to_atu(discard_fs));
    const double beta = units::beta_from_kelvin(temperature_K);
    s["window"] = {{"discard_fs", discard_fs},
                   {"first_frame", w.begin},
                   {"frames", w.size()},
                   {"t_begin_fs", units::atu_to_fs(traj.frames[w.begin].time)},
                   {"t_end_fs", units::atu_to_fs(traj.frames[w.end - 1].time)}};
    s["target_temperature_K"] = temperature_K;
    s["kinetic_temperature_K"] = analysis::kinetic_temperature(traj, w).to_json();

    std::size_t flagged = 0;
    for (std::size_t i = w.begin; i < w.end; ++i) {
        flagged += traj.frames[i].flagged ? 1 : 0;
    }
    s["flagged_frames_in_window"] = flagged;

    try {
        out.frequencies = analysis::frequency_analysis(traj, w, beta, bins);
        s["frequency"] = out.frequencies->to_json();
        s["frequency"].erase("covariance_au");
    } catch (const Error& e) {
        s["frequency"] = {{"error", e.what()}};
    }

    if (traj.masses.size() == 6) {
        const auto bonds = analysis::bond_lengths(traj, w);
        json b;
        try {
            out.bond_fit = analysis::gaussian_fit(bonds);
            b["fit"] = out.bond_fit->to_json();
            b["fit"]["mean_angstrom"] = units::bohr_to_angstrom(out.bond_fit->mean);
            b["fit"]["std_angstrom"] = units::bohr_to_angstrom(out.bond_fit->std);
            b["variance_bohr2"] = out.bond_fit->std * out.bond_fit->std;
        } catch (const Error& e) {
            b["fit"] = {{"error", e.what()}};
        }
        if (ref) {
            const double var = 1.0 / (beta * ref->reduced_mass * ref->omega * ref->omega);
            b["equipartition_variance_bohr2"] = var;
            if (out.bond_fit) {
                b["variance_ratio"] = out.bond_fit->std * out.bond_fit->std / var;
                try {
                    b["tv_vs_fci_reference"] =
                        analysis::tv_against_gaussian(bonds, ref->bond, std::sqrt(var)).tv_distance;
                } catch (const Error& e) {
                    b["tv_vs_fci_reference"] = e.what();
                }
            }
        }
        s["bond_length"] = b;
    }
    if (ref) {
        s["fci_reference"] = reference_to_json(*ref);
    }
    return out;
}

/// Mean parameter temperature over the window, sum_k mu_k xi_k^2 / (M k_B).
inline double parameter_temperature(const analysis::Trajectory& traj, const analysis::Window& w,
                                    const Eigen::VectorXd& mu) {
    if (mu.size() == 0) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = w.begin; i < w.end; ++i) {
        acc += (mu.array() * traj.frames[i].xi.array().square()).sum();
    }
    return acc / (static_cast<double>(w.size()) * static_cast<double>(mu.size()) * units::kBoltzmann);
}

struct RunResult {
    fs::path output_dir;
    std::uint64_t steps_completed = 0;
    std::uint64_t frames_written = 0;
    std::uint64_t flagged_frames = 0;
    LedgerReport ledger;
    json summary;
};

/**
 * Runs the configured dynamics and writes trajectory.csv (plus schema),
 * metadata.json, ledger_per_step.csv and summary.json. On a mid-run error the
 * frames so far are flushed, metadata records the failure, and the error is
 * rethrown.
 */
inline RunResult cmd_run(const io::RunConfig& cfg, std::ostream& log) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto geom = cfg.molecule();
    const chem::MolecularModel model(geom, cfg.fd_step_bohr);
    const AnsatzCircuit circuit = molecular_ansatz(model, geom, cfg.depth);
    const auto r0 = geom.coordinates();
    const ModelSnapshot snap0 = model.snapshot(r0);
    const double fci0 = min_eigenpair(snap0.hamiltonian).value;
    const InitResult init = initialize_parameters(snap0.hamiltonian, circuit, cfg.init);
    log << "init: E = " << std::setprecision(10) << init.energy << " hartree (FCI " << fci0 << ")\n";

    const LangevinConfig lcfg = cfg.langevin(geom, circuit.n_parameters());
    RunResult result;
    result.output_dir = cfg.resolved_output_dir();
    fs::create_directories(result.output_dir);

    io::TrajectorySchema schema;
    schema.n_coordinates = r0.size();
    schema.n_parameters = circuit.n_parameters();
    schema.masses = geom.coordinate_masses();
    schema.temperature_K = cfg.temperature_K;
    schema.dt_fs = cfg.dt_fs;
    schema.stride = cfg.stride;

    json meta{{"format", io::kMetadataFormat},
              {"version", 1},
              {"config", cfg.to_json()},
              {"geometry_source", cfg.geometry_source},
              {"seed", cfg.estimation.seed},
              {"init_seed", cfg.init.seed},
              {"ansatz", circuit.to_json()},
              {"n_qubits", model.n_qubits()},
              {"hamiltonian_terms", snap0.hamiltonian.size()},
              {"units", unit_conventions()},
              {"deviations", method_deviations()},
              {"init", init_to_json(init, fci0)},
              {"virtual_mass_au", std::vector<double>(lcfg.mu.data(), lcfg.mu.data() + lcfg.mu.size())}};

    analysis::Trajectory traj;
    traj.masses = lcfg.masses;
    traj.metadata = meta;

    const auto finish = [&](auto& integ, const std::string& status) {
        result.ledger = ledger_report(integ.ledger());
        meta["status"] = status;
        meta["steps_completed"] = result.steps_completed;
        meta["frames_written"] = result.frames_written;
        meta["flagged_frames"] = result.flagged_frames;
        meta["ledger"] = result.ledger.to_json();
        write_json(result.output_dir / "metadata.json", meta);
        std::string csv = "step,shots,circuits\n";
        const auto& per_step = integ.ledger().per_step();
        for (std::size_t k = 0; k < per_step.size(); ++k) {
            io::append_number(csv, static_cast<std::uint64_t>(k));
            csv += ',';
            io::append_number(csv, per_step[k].shots);
            csv += ',';
            io::append_number(csv, per_step[k].circuits);
            csv += '\n';
        }
        std::ofstream(result.output_dir / "ledger_per_step.csv", std::ios::binary) << csv;
    };

    const auto drive = [&](auto& integ) {
        MDState state = initial_state(to_vector(r0), init.theta);
        {
            io::TrajectoryWriter writer(result.output_dir / "trajectory.csv", schema);
            try {
                const RunSummary rs = run_dynamics(integ, state, cfg.n_steps, cfg.stride, [&](const Frame& f) {
                    writer.write(f);
                    traj.frames.push_back(f);
                    ++result.frames_written;
                });
                result.steps_completed = rs.steps_completed;
                result.flagged_frames = rs.flagged_frames;
            } catch (const std::exception& e) {
                writer.flush();
                result.steps_completed = integ.ledger().per_step().size();
                finish(integ, std::string("aborted: ") + e.what());
                log << "aborted after " << result.steps_completed << " steps: " << e.what() << "\n";
                throw;
            }
        }
        finish(integ, "completed");
    };

    if (cfg.method == io::Method::qcpmd) {
        QcpmdIntegrator<chem::MolecularModel> integ(model, circuit, lcfg);
        drive(integ);
    } else {
        VqeMdIntegrator<chem::MolecularModel> integ(model, circuit, lcfg, cfg.vqe);
        drive(integ);
    }

    json summary{{"method", io::detail::enum_name(cfg.method, io::kMethods)},
                 {"steps_completed", result.steps_completed},
                 {"frames", result.frames_written},
                 {"flagged_frames", result.flagged_frames},
                 {"ledger", result.ledger.to_json()}};
    try {
        const auto ref = diatomic_reference(geom);
        auto stats = window_statistics(traj, cfg.analysis.discard_fs, cfg.analysis.jackknife_bins,
                                       cfg.temperature_K, ref);
        summary.update(stats.summary);
        const analysis::Window w = analysis::window_after(traj, units::fs_to_atu(cfg.analysis.discard_fs));
        summary["parameter_temperature_K"] = parameter_temperature(traj, w, lcfg.mu);
        if (stats.bond_fit) {
            write_histogram_csv(result.output_dir / "bond_histogram.csv", *stats.bond_fit);
        }
    } catch (const DomainError& e) {
        summary["analysis"] = {{"skipped", e.what()}};
    }
    write_json(result.output_dir / "summary.json", summary);
    result.summary = summary;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    log << "run: " << result.steps_completed << " steps, " << result.frames_written << " frames in " << elapsed
        << " s -> " << result.output_dir.string() << "\n";
    return result;
}

struct AnalyzeOptions {
    double discard_fs = 500.0;
    std::size_t jackknife_bins = 5;
    /// Defaults to the trajectory's directory.
    std::optional<fs::path> output_dir;
};

struct AnalyzeResult {
    analysis::FrequencyReport report;
    std::optional<chem::HarmonicReference> reference;
    json document;
};

/**
 * Frequency analysis of a stored trajectory. Writes frequency_report.json and,
 * for diatomics, bond_histogram.csv. If metadata.json sits next to the
 * trajectory, the FCI harmonic reference of its geometry is added to the table.
 */
inline AnalyzeResult cmd_analyze(const fs::path& trajectory_csv, const AnalyzeOptions& opts, std::ostream& out) {
    if (opts.jackknife_bins < 2) {
        throw ConfigError("jackknife bins must be >= 2");
    }
    if (!(opts.discard_fs >= 0.0)) {
        throw ConfigError("discard span must be >= 0 fs");
    }
    const auto loaded = io::read_trajectory(trajectory_csv);
    const auto& traj = loaded.trajectory;
    if (traj.frames.empty()) {
        throw DomainError("trajectory has no frames");
    }
    const double t_end = units::atu_to_fs(traj.frames.back().time - traj.frames.front().time);
    if (opts.discard_fs >= t_end) {
        throw ConfigError("analysis window is empty: discard span " + std::to_string(opts.discard_fs) +
                          " fs covers the whole trajectory (" + std::to_string(t_end) + " fs)");
    }
    AnalyzeResult result;
    const fs::path dir = trajectory_csv.has_parent_path() ? trajectory_csv.parent_path() : fs::path(".");
    if (const fs::path meta = dir / "metadata.json"; fs::exists(meta)) {
        const json m = io::read_json_file(meta);
        if (m.contains("config") && m["config"].contains("geometry")) {
            result.reference = diatomic_reference(chem::MolecularGeometry::from_json(m["config"]["geometry"]));
        }
    }
    auto stats = window_statistics(traj, opts.discard_fs, opts.jackknife_bins, loaded.schema.temperature_K,
                                   result.reference);
    if (!stats.frequencies) {
        throw DomainError("frequency analysis failed: " + stats.summary["frequency"].value("error", std::string()));
    }
    result.report = *stats.frequencies;
    result.document = stats.summary;
    result.document["trajectory"] = trajectory_csv.string();
    result.document["frequency"] = result.report.to_json();

    const fs::path out_dir = opts.output_dir.value_or(dir);
    fs::create_directories(out_dir);
    write_json(out_dir / "frequency_report.json", result.document);
    if (stats.bond_fit) {
        write_histogram_csv(out_dir / "bond_histogram.csv", *stats.bond_fit);
    }

    out << std::fixed << std::setprecision(1);
    out << "mode  QCPMD (cm^-1)  jackknife SE  plain (cm^-1)";
    if (result.reference) {
        out << "  FCI (cm^-1)";
    }
    out << "\n";
    for (std::size_t i = 0; i < result.report.frequencies.size(); ++i) {
        out << std::setw(4) << i << std::setw(15) << result.report.frequencies[i] << std::setw(14)
            << result.report.standard_errors[i] << std::setw(15) << result.report.plain_frequencies[i];
        if (result.reference && result.report.frequencies.size() == 1) {
            out << std::setw(13) << result.reference->wavenumber;
        }
        out << "\n";
    }
    out << std::defaultfloat;
    return result;
}

struct ScanResult {
    std::vector<chem::CurvePoint> curve;
    std::optional<chem::HarmonicReference> reference;
    std::string reference_error;
};

/**
 * RHF and FCI energies over a bond grid in angstrom; writes potential_curve.csv
 * and harmonic_reference.json. The harmonic reference brackets the grid
 * minimum by its neighbours, so it needs an interior minimum.
 */
inline ScanResult cmd_scan(const chem::MolecularGeometry& reference, const std::vector<double>& bonds_angstrom,
                           const fs::path& output_dir, std::ostream& log) {
    if (reference.size() != 2) {
        throw ConfigError("scan needs a diatomic geometry");
    }
    std::vector<double> bonds(bonds_angstrom.size());
    std::transform(bonds_angstrom.begin(), bonds_angstrom.end(), bonds.begin(), units::angstrom_to_bohr);
    ScanResult result;
    result.curve = chem::scan_bond(reference, bonds);

    fs::create_directories(output_dir);
    std::string csv = "bond_angstrom,e_rhf_hartree,e_fci_hartree,ok,error\n";
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
        const auto& p = result.curve[i];
        io::append_number(csv, units::bohr_to_angstrom(p.bond));
        csv += ',';
        if (p.ok) {
            io::append_number(csv, p.e_rhf);
            csv += ',';
            io::append_number(csv, p.e_fci);
            csv += ",1,\n";
            if (!best || p.e_fci < result.curve[*best].e_fci) {
                best = i;
            }
        } else {
            std::string msg = p.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            csv += ",,0," + msg + "\n";
        }
    }
    std::ofstream(output_dir / "potential_curve.csv", std::ios::binary) << csv;

    json ref_json;
    if (!best) {
        result.reference_error = "no converged grid point";
    } else if (*best == 0 || *best + 1 == result.curve.size() || !result.curve[*best - 1].ok ||
               !result.curve[*best + 1].ok) {
        result.reference_error = "grid minimum is not interior; no harmonic reference";
    } else {
        try {
            result.reference =
                chem::fci_harmonic_reference(reference, result.curve[*best - 1].bond, result.curve[*best + 1].bond);
        } catch (const Error& e) {
            result.reference_error = e.what();
        }
    }
    if (result.reference) {
        ref_json = reference_to_json(*result.reference);
        log << "FCI minimum " << std::setprecision(6) << units::bohr_to_angstrom(result.reference->bond)
            << " angstrom, harmonic frequency " << std::setprecision(6) << result.reference->wavenumber
            << " cm^-1\n";
    } else {
        ref_json = {{"error", result.reference_error}};
        log << "harmonic reference: " << result.reference_error << "\n";
    }
    write_json(output_dir / "harmonic_reference.json", ref_json);
    return result;
}

struct ForceHistogramEntry {
    std::uint64_t n_shot = 0;
    std::vector<double> samples;
    std::optional<analysis::GaussianFit> fit;
    bool degenerate = false;
};

struct ForceHistogramResult {
    double exact_force = 0.0;
    std::vector<ForceHistogramEntry> entries;
};

/// Force on the second atom projected on the bond axis (atom 1 to atom 2), hartree/bohr.
inline double bond_axis_force(const Eigen::VectorXd& force, const std::vector<double>& r) {
    const Eigen::Vector3d d(r[3] - r[0], r[4] - r[1], r[5] - r[2]);
    return force.segment<3>(3).dot(d.normalized());
}

/**
 * Repeated nuclear-force estimates at the configured geometry and the
 * initialized parameters, one independent sample set per repetition. Writes
 * force_histogram_n<N>.csv per shot count and force_histogram.json.
 */
inline ForceHistogramResult cmd_force_histogram(const io::RunConfig& cfg, const std::vector<std::uint64_t>& n_shots,
                                                std::uint64_t repetitions, std::ostream& log) {
    if (repetitions < analysis::kMinHistogramSamples) {
        throw ConfigError("force-histogram needs at least 100 repetitions");
    }
    if (n_shots.empty()) {
        throw ConfigError("force-histogram needs at least one n_shot value");
    }
    const auto geom = cfg.molecule();
    if (geom.size() != 2) {
        throw ConfigError("force-histogram needs a diatomic geometry");
    }
    const chem::MolecularModel model(geom, cfg.fd_step_bohr);
    const AnsatzCircuit circuit = molecular_ansatz(model, geom, cfg.depth);
    const auto r0 = geom.coordinates();
    const ModelSnapshot snap = model.snapshot(r0);
    const InitResult init = initialize_parameters(snap.hamiltonian, circuit, cfg.init);
    const std::span<const double> theta(init.theta.data(), static_cast<std::size_t>(init.theta.size()));

    ForceHistogramResult result;
    EstimationConfig exact;
    exact.mode = EstimationMode::exact;
    exact.reuse_samples = false;
    result.exact_force = bond_axis_force(estimate_nuclear_force(snap, circuit, theta, exact, {}, nullptr).value, r0);

    const fs::path dir = cfg.resolved_output_dir();
    fs::create_directories(dir);
    json doc{{"geometry", cfg.geometry},
             {"seed", cfg.estimation.seed},
             {"repetitions", repetitions},
             {"mode", io::detail::enum_name(cfg.estimation.mode, io::kModes)},
             {"exact_force_hartree_per_bohr", result.exact_force},
             {"init", init_to_json(init, min_eigenpair(snap.hamiltonian).value)},
             {"histograms", json::array()}};
    for (const std::uint64_t n : n_shots) {
        EstimationConfig ecfg = cfg.estimation;
        ecfg.n_shot = n;
        ecfg.validate();
        ForceHistogramEntry entry;
        entry.n_shot = n;
        entry.samples.reserve(repetitions);
        for (std::uint64_t rep = 0; rep < repetitions; ++rep) {
            // Shot count enters the stream position so each n_shot draws independent samples.
            const StreamContext ctx{rep, n};
            PauliSampleCache cache;
            (void)estimate_energy(snap.hamiltonian, circuit, theta, ecfg, ctx, &cache);
            const auto f = estimate_nuclear_force(snap, circuit, theta, ecfg, ctx, &cache);
            entry.samples.push_back(bond_axis_force(f.value, r0));
        }
        json h{{"n_shot", n}};
        try {
            entry.fit = analysis::gaussian_fit(entry.samples);
            h["fit"] = entry.fit->to_json();
            h["histogram_csv"] = "force_histogram_n" + std::to_string(n) + ".csv";
            write_histogram_csv(dir / h["histogram_csv"].get<std::string>(), *entry.fit);
            log << "n_shot " << n << ": mean " << std::setprecision(6) << entry.fit->mean << ", std "
                << entry.fit->std << ", TV " << entry.fit->tv_distance << "\n";
        } catch (const DomainError& e) {
            entry.degenerate = true;
            h["degenerate"] = true;
            h["reason"] = e.what();
            h["value"] = entry.samples.front();
            log << "n_shot " << n << ": degenerate (" << e.what() << ")\n";
        }
        doc["histograms"].push_back(h);
        result.entries.push_back(std::move(entry));
    }
    write_json(dir / "force_histogram.json", doc);
    return result;
}

} // namespace qcpmd::cli
