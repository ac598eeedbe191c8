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
 * @file io.hpp
 * Run configuration (JSON with unit-bearing keys) and the trajectory CSV
 * format with its JSON schema sidecar.
 *
 * Numbers are written with std::to_chars in shortest round-trip form, so a
 * trajectory is a pure function of the configuration and seed and reads
 * back bit-exactly.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcpmd/analysis.hpp"
#include "qcpmd/chem/geometry.hpp"
#include "qcpmd/chem/hamiltonian.hpp"
#include "qcpmd/dynamics.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/estimator.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Environment variable that anchors relative output directories.
inline constexpr const char* kOutputRootEnv = "QCPMD_OUTPUT_ROOT";

/// Relative paths are taken against $QCPMD_OUTPUT_ROOT when it is set and non-empty.
inline fs::path resolve_output(const fs::path& p) {
    if (p.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
            return fs::path(root) / p;
        }
    }
    return p;
}

/// Parses JSON text; syntax errors become ConfigError with line and column.
inline json parse_json_text(std::string_view text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const fs::path& path) { return parse_json_text(read_text(path), path.string()); }

namespace detail {

/// Typed access to one JSON object; rejects keys that were never read.
class KeyReader {
  public:
    KeyReader(const json& obj, std::string where) : obj_{obj}, where_{std::move(where)} {
        if (!obj_.is_object()) {
            throw ConfigError(label() + ": expected an object");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            return fallback;
        }
        return convert<T>(key);
    }

    template <class T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            throw ConfigError(path(key) + ": required key missing");
        }
        return convert<T>(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    KeyReader child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return KeyReader(obj_.contains(key) ? obj_.at(key) : empty, where_.empty() ? key : where_ + "." + key);
    }

    /// Throws on the first key that was not consumed.
    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ConfigError(path(it.key()) + ": unknown key");
            }
        }
    }

    [[nodiscard]] std::string path(const std::string& key) const {
        return where_.empty() ? "config key '" + key + "'" : "config key '" + where_ + "." + key + "'";
    }

  private:
    [[nodiscard]] std::string label() const { return where_.empty() ? "config" : "config key '" + where_ + "'"; }

    template <class T>
    T convert(const std::string& key) const {
        const json& v = obj_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError(path(key) + ": expected true or false");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError(path(key) + ": expected a string");
            }
        } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
                throw ConfigError(path(key) + ": expected a non-negative integer");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ConfigError(path(key) + ": expected an integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError(path(key) + ": expected a number");
            }
        }
        return v.get<T>();
    }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class E>
E parse_enum(const std::string& text, const std::vector<std::pair<std::string, E>>& table, const std::string& where) {
    std::string allowed;
    for (const auto& [name, value] : table) {
        if (name == text) {
            return value;
        }
        allowed += (allowed.empty() ? "" : ", ") + name;
    }
    throw ConfigError(where + ": '" + text + "' is not one of " + allowed);
}

template <class E>
std::string enum_name(E value, const std::vector<std::pair<std::string, E>>& table) {
    for (const auto& [name, v] : table) {
        if (v == value) {
            return name;
        }
    }
    return "unknown";
}

} // namespace detail

enum class Method { qcpmd, vqe_md };

inline const std::vector<std::pair<std::string, Method>> kMethods{{"qcpmd", Method::qcpmd}, {"vqe-md", Method::vqe_md}};
inline const std::vector<std::pair<std::string, Thermostat>> kThermostats{{"fdt", Thermostat::fdt},
                                                                         {"off", Thermostat::off}};
inline const std::vector<std::pair<std::string, FrictionModel>> kFrictions{{"covariance", FrictionModel::covariance},
                                                                          {"diagonal", FrictionModel::diagonal}};
inline const std::vector<std::pair<std::string, EstimationMode>> kModes{{"sampled", EstimationMode::sampled},
                                                                       {"exact", EstimationMode::exact}};
inline const std::vector<std::pair<std::string, SamplingMethod>> kSamplings{{"parity", SamplingMethod::parity},
                                                                           {"literal", SamplingMethod::literal}};

struct AnalysisOptions {
    double discard_fs = 500.0;
    std::size_t jackknife_bins = 5;
};

/**
 * All run inputs in I/O units. The geometry is kept as the JSON object that
 * was read, so metadata reproduces the exact nuclear coordinates.
 */
struct RunConfig {
    Method method = Method::qcpmd;
    json geometry = json::object();
    std::string geometry_source = "inline";
    double dt_fs = 0.01;
    double temperature_K = 70.0;
    /// Virtual masses in hartree fs^2; one entry means uniform.
    std::vector<double> mu_hartree_fs2{0.01};
    std::uint64_t n_steps = 0;
    Thermostat thermostat = Thermostat::fdt;
    FrictionModel friction = FrictionModel::covariance;
    EstimationConfig estimation{};
    std::size_t depth = 4;
    std::uint64_t stride = 1;
    std::string output_dir = "qcpmd-run";
    AnalysisOptions analysis{};
    VqeOptions vqe{};
    InitOptions init{};
    double fd_step_bohr = chem::kNuclearFdStep;

    [[nodiscard]] chem::MolecularGeometry molecule() const {
        try {
            return chem::MolecularGeometry::from_json(geometry);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }
    }

    /// Per-parameter virtual masses in atomic units.
    [[nodiscard]] Eigen::VectorXd mu_au(std::size_t n_parameters) const {
        if (mu_hartree_fs2.size() != 1 && mu_hartree_fs2.size() != n_parameters) {
            throw ConfigError("mu: expected 1 or " + std::to_string(n_parameters) + " entries, got " +
                              std::to_string(mu_hartree_fs2.size()));
        }
        Eigen::VectorXd mu(static_cast<Eigen::Index>(n_parameters));
        for (std::size_t k = 0; k < n_parameters; ++k) {
            mu[static_cast<Eigen::Index>(k)] =
                units::hartree_fs2_to_au(mu_hartree_fs2.size() == 1 ? mu_hartree_fs2[0] : mu_hartree_fs2[k]);
        }
        return mu;
    }

    [[nodiscard]] LangevinConfig langevin(const chem::MolecularGeometry& geom, std::size_t n_parameters) const {
        LangevinConfig cfg;
        cfg.dt = units::fs_to_atu(dt_fs);
        cfg.beta = units::beta_from_kelvin(temperature_K);
        const auto m = geom.coordinate_masses();
        cfg.masses = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
        cfg.mu = mu_au(n_parameters);
        cfg.n_steps = n_steps;
        cfg.thermostat = thermostat;
        cfg.friction = friction;
        cfg.estimation = estimation;
        return cfg;
    }

    /// Output directory; relative paths are anchored at $QCPMD_OUTPUT_ROOT when it is set.
    [[nodiscard]] fs::path resolved_output_dir() const;

    void validate() const {
        const auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
        if (!positive(dt_fs)) {
            throw ConfigError("config key 'dt_fs': must be positive");
        }
        if (!positive(temperature_K)) {
            throw ConfigError("config key 'temperature_K': must be positive");
        }
        for (double m : mu_hartree_fs2) {
            if (!positive(m)) {
                throw ConfigError("config key 'mu_hartree_fs2': entries must be positive");
            }
        }
        if (mu_hartree_fs2.empty()) {
            throw ConfigError("config key 'mu_hartree_fs2': empty");
        }
        if (depth == 0) {
            throw ConfigError("config key 'ansatz.depth': must be >= 1");
        }
        if (stride == 0) {
            throw ConfigError("config key 'stride': must be >= 1");
        }
        if (!(analysis.discard_fs >= 0.0)) {
            throw ConfigError("config key 'analysis.discard_fs': must be >= 0");
        }
        if (analysis.jackknife_bins < 2) {
            throw ConfigError("config key 'analysis.jackknife_bins': must be >= 2");
        }
        if (fd_step_bohr <= 0.0) {
            throw ConfigError("config key 'fd_step_bohr': must be positive");
        }
        if (init.starts < 1) {
            throw ConfigError("config key 'init.starts': must be >= 1");
        }
        estimation.validate();
        (void)molecule();
    }

    /// Normalized form; feeding it back to from_json gives the same configuration.
    [[nodiscard]] json to_json() const {
        return {{"method", detail::enum_name(method, kMethods)},
                {"geometry", geometry},
                {"dt_fs", dt_fs},
                {"temperature_K", temperature_K},
                {"mu_hartree_fs2", mu_hartree_fs2},
                {"n_steps", n_steps},
                {"thermostat", detail::enum_name(thermostat, kThermostats)},
                {"friction", detail::enum_name(friction, kFrictions)},
                {"stride", stride},
                {"output_dir", output_dir},
                {"fd_step_bohr", fd_step_bohr},
                {"ansatz", {{"depth", depth}}},
                {"estimation",
                 {{"n_shot", estimation.n_shot},
                  {"mode", detail::enum_name(estimation.mode, kModes)},
                  {"seed", estimation.seed},
                  {"sampling", detail::enum_name(estimation.sampling, kSamplings)},
                  {"reuse_samples", estimation.reuse_samples},
                  {"threads", estimation.threads}}},
                {"analysis", {{"discard_fs", analysis.discard_fs}, {"jackknife_bins", analysis.jackknife_bins}}},
                {"vqe",
                 {{"max_iterations", vqe.max_iterations},
                  {"gradient_tolerance", vqe.gradient_tolerance},
                  {"max_jump", vqe.max_jump}}},
                {"init",
                 {{"seed", init.seed},
                  {"starts", init.starts},
                  {"spread", init.spread},
                  {"gradient_tolerance", init.gradient_tolerance},
                  {"max_iterations", init.max_iterations}}}};
    }

    /**
     * @param base Directory against which a geometry file path is resolved.
     * @throws ConfigError naming the offending key.
     */
    static RunConfig from_json(const json& j, const fs::path& base = {}) {
        RunConfig c;
        detail::KeyReader r(j, "");
        c.method = detail::parse_enum(r.get<std::string>("method", "qcpmd"), kMethods, r.path("method"));
        if (!r.has("geometry")) {
            throw ConfigError(r.path("geometry") + ": required key missing");
        }
        const json& g = r.raw("geometry");
        if (g.is_string()) {
            const fs::path gp = base / g.get<std::string>();
            if (!fs::exists(gp)) {
                throw ConfigError(r.path("geometry") + ": file not found: " + gp.string());
            }
            c.geometry = read_json_file(gp);
            c.geometry_source = gp.string();
        } else if (g.is_object()) {
            c.geometry = g;
        } else {
            throw ConfigError(r.path("geometry") + ": expected a file path or an object");
        }
        c.dt_fs = r.get<double>("dt_fs", c.dt_fs);
        c.temperature_K = r.get<double>("temperature_K", c.temperature_K);
        if (r.has("mu_hartree_fs2") && r.has("mu_au")) {
            throw ConfigError("config: give only one of 'mu_hartree_fs2' and 'mu_au'");
        }
        const auto read_mu = [&](const std::string& key, double scale) {
            const json& m = r.raw(key);
            std::vector<double> out;
            if (m.is_number()) {
                out.push_back(m.get<double>());
            } else if (m.is_array() && std::all_of(m.begin(), m.end(), [](const json& x) { return x.is_number(); })) {
                out = m.get<std::vector<double>>();
            } else {
                throw ConfigError(r.path(key) + ": expected a number or an array of numbers");
            }
            for (auto& x : out) {
                x *= scale;
            }
            return out;
        };
        if (r.has("mu_hartree_fs2")) {
            c.mu_hartree_fs2 = read_mu("mu_hartree_fs2", 1.0);
        } else if (r.has("mu_au")) {
            c.mu_hartree_fs2 = read_mu("mu_au", units::kFsPerAtu * units::kFsPerAtu);
        }
        c.n_steps = r.get<std::uint64_t>("n_steps", c.n_steps);
        c.thermostat = detail::parse_enum(r.get<std::string>("thermostat", "fdt"), kThermostats, r.path("thermostat"));
        c.friction = detail::parse_enum(r.get<std::string>("friction", "covariance"), kFrictions, r.path("friction"));
        c.stride = r.get<std::uint64_t>("stride", c.stride);
        c.output_dir = r.get<std::string>("output_dir", c.output_dir);
        c.fd_step_bohr = r.get<double>("fd_step_bohr", c.fd_step_bohr);

        auto a = r.child("ansatz");
        c.depth = a.get<std::size_t>("depth", c.depth);
        a.finish();

        auto e = r.child("estimation");
        c.estimation.n_shot = e.get<std::uint64_t>("n_shot", c.estimation.n_shot);
        c.estimation.mode = detail::parse_enum(e.get<std::string>("mode", "sampled"), kModes, e.path("mode"));
        c.estimation.seed = e.get<std::uint64_t>("seed", c.estimation.seed);
        c.estimation.sampling =
            detail::parse_enum(e.get<std::string>("sampling", "parity"), kSamplings, e.path("sampling"));
        c.estimation.reuse_samples = e.get<bool>("reuse_samples", c.estimation.reuse_samples);
        c.estimation.threads = e.get<unsigned>("threads", c.estimation.threads);
        e.finish();

        auto an = r.child("analysis");
        c.analysis.discard_fs = an.get<double>("discard_fs", c.analysis.discard_fs);
        c.analysis.jackknife_bins = an.get<std::size_t>("jackknife_bins", c.analysis.jackknife_bins);
        an.finish();

        auto v = r.child("vqe");
        c.vqe.max_iterations = v.get<int>("max_iterations", c.vqe.max_iterations);
        c.vqe.gradient_tolerance = v.get<double>("gradient_tolerance", c.vqe.gradient_tolerance);
        c.vqe.max_jump = v.get<double>("max_jump", c.vqe.max_jump);
        v.finish();

        auto in = r.child("init");
        c.init.seed = in.get<std::uint64_t>("seed", c.init.seed);
        c.init.starts = in.get<int>("starts", c.init.starts);
        c.init.spread = in.get<double>("spread", c.init.spread);
        c.init.gradient_tolerance = in.get<double>("gradient_tolerance", c.init.gradient_tolerance);
        c.init.max_iterations = in.get<int>("max_iterations", c.init.max_iterations);
        in.finish();

        r.finish();
        c.validate();
        return c;
    }
};

inline constexpr std::string_view kMetadataFormat = "qcpmd-metadata";

inline fs::path RunConfig::resolved_output_dir() const { return resolve_output(output_dir); }

/**
 * Loads a run config file, or the "config" member of a metadata.json written
 * by a previous run. `overrides` is merged in (JSON merge patch) before validation.
 */
inline RunConfig load_config(const fs::path& path, const json& overrides = json::object()) {
    json j = read_json_file(path);
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (j.is_object() && j.value("format", "") == kMetadataFormat) {
        j = j.at("config");
    }
    j.merge_patch(overrides);
    return RunConfig::from_json(j, base);
}

/// Column layout of trajectory.csv; serialized to trajectory.schema.json.
struct TrajectorySchema {
    std::size_t n_coordinates = 0;
    std::size_t n_parameters = 0;
    /// Per coordinate, electron masses.
    std::vector<double> masses;
    double temperature_K = 0.0;
    double dt_fs = 0.0;
    std::uint64_t stride = 1;

    static constexpr int kVersion = 1;

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> columns() const {
        std::vector<std::pair<std::string, std::string>> c{{"step", "1"}, {"t_fs", "fs"}};
        const auto block = [&](const std::string& name, std::size_t n, const std::string& unit) {
            for (std::size_t i = 0; i < n; ++i) {
                c.emplace_back(name + "_" + std::to_string(i), unit);
            }
        };
        block("R", n_coordinates, "bohr");
        block("v", n_coordinates, "bohr/atu");
        block("theta", n_parameters, "rad");
        block("xi", n_parameters, "rad/atu");
        c.emplace_back("E", "hartree");
        c.emplace_back("E_var", "hartree^2");
        block("F", n_coordinates, "hartree/bohr");
        block("f2", n_coordinates, "hartree^2/bohr^2");
        c.emplace_back("flagged", "0/1");
        return c;
    }

    [[nodiscard]] json to_json() const {
        json cols = json::array();
        for (const auto& [name, unit] : columns()) {
            cols.push_back({{"name", name}, {"unit", unit}});
        }
        return {{"format", "qcpmd-trajectory"},
                {"version", kVersion},
                {"n_coordinates", n_coordinates},
                {"n_parameters", n_parameters},
                {"masses_me", masses},
                {"temperature_K", temperature_K},
                {"dt_fs", dt_fs},
                {"stride", stride},
                {"columns", cols}};
    }

    static TrajectorySchema from_json(const json& j) {
        try {
            if (j.at("format").get<std::string>() != "qcpmd-trajectory" || j.at("version").get<int>() != kVersion) {
                throw ConfigError("trajectory schema: unsupported format or version");
            }
            TrajectorySchema s;
            s.n_coordinates = j.at("n_coordinates").get<std::size_t>();
            s.n_parameters = j.at("n_parameters").get<std::size_t>();
            s.masses = j.at("masses_me").get<std::vector<double>>();
            s.temperature_K = j.at("temperature_K").get<double>();
            s.dt_fs = j.at("dt_fs").get<double>();
            s.stride = j.at("stride").get<std::uint64_t>();
            if (s.masses.size() != s.n_coordinates) {
                throw ConfigError("trajectory schema: masses do not match n_coordinates");
            }
            return s;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("trajectory schema: ") + e.what());
        }
    }
};

inline fs::path schema_path(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".schema.json");
    return p;
}

/// Appends the shortest round-trip decimal form of x.
inline void append_number(std::string& out, double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, res.ptr);
}

inline void append_number(std::string& out, std::uint64_t x) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, res.ptr);
}

/// Streams frames to CSV; buffered rows are flushed every `flush_every` frames and on destruction.
class TrajectoryWriter {
  public:
    TrajectoryWriter(const fs::path& csv, TrajectorySchema schema, std::size_t flush_every = 10000)
        : schema_{std::move(schema)}, flush_every_{flush_every} {
        std::ofstream sidecar(schema_path(csv), std::ios::binary);
        sidecar << schema_.to_json().dump(2) << '\n';
        if (!sidecar) {
            throw Error("cannot write " + schema_path(csv).string());
        }
        out_.open(csv, std::ios::binary);
        if (!out_) {
            throw Error("cannot write " + csv.string());
        }
        std::string header;
        for (const auto& [name, unit] : schema_.columns()) {
            header += (header.empty() ? "" : ",") + name;
        }
        out_ << header << '\n';
    }

    TrajectoryWriter(const TrajectoryWriter&) = delete;
    TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;

    ~TrajectoryWriter() {
        try {
            flush();
        } catch (...) {
        }
    }

    void write(const Frame& f) {
        const auto n = static_cast<Eigen::Index>(schema_.n_coordinates);
        const auto m = static_cast<Eigen::Index>(schema_.n_parameters);
        if (f.R.size() != n || f.v.size() != n || f.theta.size() != m || f.xi.size() != m || f.force.size() != n ||
            f.force_variance.size() != n) {
            throw DimensionError("frame does not match the trajectory schema");
        }
        append_number(buffer_, f.step);
        const auto put = [&](double x) {
            buffer_ += ',';
            append_number(buffer_, x);
        };
        put(units::atu_to_fs(f.time));
        for (const auto* v : {&f.R, &f.v, &f.theta, &f.xi}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) {
                put((*v)[i]);
            }
        }
        put(f.energy);
        put(f.energy_variance);
        for (const auto* v : {&f.force, &f.force_variance}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) {
                put((*v)[i]);
            }
        }
        buffer_ += f.flagged ? ",1\n" : ",0\n";
        if (++pending_ >= flush_every_) {
            flush();
        }
    }

    void flush() {
        out_ << buffer_;
        out_.flush();
        buffer_.clear();
        pending_ = 0;
        if (!out_) {
            throw Error("trajectory write failed");
        }
    }

  private:
    TrajectorySchema schema_;
    std::size_t flush_every_;
    std::ofstream out_;
    std::string buffer_;
    std::size_t pending_ = 0;
};

struct LoadedTrajectory {
    TrajectorySchema schema;
    analysis::Trajectory trajectory;
};

/// Reads trajectory.csv and its schema sidecar; header and row widths must match the schema.
inline LoadedTrajectory read_trajectory(const fs::path& csv) {
    const fs::path sp = schema_path(csv);
    if (!fs::exists(csv)) {
        throw ConfigError("trajectory not found: " + csv.string());
    }
    if (!fs::exists(sp)) {
        throw ConfigError("trajectory schema not found: " + sp.string());
    }
    LoadedTrajectory out;
    out.schema = TrajectorySchema::from_json(read_json_file(sp));
    const auto cols = out.schema.columns();
    std::ifstream in(csv, std::ios::binary);
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("trajectory schema mismatch: empty file");
    }
    std::string expected;
    for (const auto& [name, unit] : cols) {
        expected += (expected.empty() ? "" : ",") + name;
    }
    if (line != expected) {
        throw ConfigError("trajectory schema mismatch: header does not match " + sp.filename().string());
    }
    const auto n = static_cast<Eigen::Index>(out.schema.n_coordinates);
    const auto m = static_cast<Eigen::Index>(out.schema.n_parameters);
    auto& traj = out.trajectory;
    traj.masses = Eigen::Map<const Eigen::VectorXd>(out.schema.masses.data(), n);
    std::vector<double> row(cols.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::size_t k = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end && k < row.size()) {
            const char* comma = std::find(p, end, ',');
            const auto res = std::from_chars(p, comma, row[k]);
            if (res.ec != std::errc{} || res.ptr != comma) {
                throw ConfigError("trajectory schema mismatch: bad number at line " + std::to_string(line_no) +
                                  ", column " + std::to_string(k + 1));
            }
            ++k;
            p = comma + 1;
        }
        if (k != row.size() || p <= end) {
            throw ConfigError("trajectory schema mismatch: wrong field count at line " + std::to_string(line_no));
        }
        Frame f;
        std::size_t c = 0;
        f.step = static_cast<std::uint64_t>(row[c++]);
        f.time = units::fs_to_atu(row[c++]);
        const auto take = [&](Eigen::Index len) {
            Eigen::VectorXd v(len);
            for (Eigen::Index i = 0; i < len; ++i) {
                v[i] = row[c++];
            }
            return v;
        };
        f.R = take(n);
        f.v = take(n);
        f.theta = take(m);
        f.xi = take(m);
        f.energy = row[c++];
        f.energy_variance = row[c++];
        f.force = take(n);
        f.force_variance = take(n);
        f.flagged = row[c++] != 0.0;
        traj.frames.push_back(std::move(f));
    }
    traj.validate();
    return out;
}

} // namespace qcpmd::io
