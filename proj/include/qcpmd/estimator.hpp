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
 * @file estimator.hpp
 * Shot-based estimators of the energy, nuclear forces and parameter forces,
 * with per-component statistical variances and resource accounting.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcpmd/errors.hpp"
#include "qcpmd/model.hpp"
#include "qcpmd/operator.hpp"
#include "qcpmd/qsim.hpp"
#include "qcpmd/random.hpp"

namespace qcpmd {

enum class EstimationMode { sampled, exact };

/// parity: Bernoulli draw from the exact <P>; literal: eigenbasis rotation and bitstring sampling.
enum class SamplingMethod { parity, literal };

struct EstimationConfig {
    std::uint64_t n_shot = 51;
    EstimationMode mode = EstimationMode::sampled;
    std::uint64_t seed = 0;
    SamplingMethod sampling = SamplingMethod::parity;
    /// Nuclear forces reuse the energy's Pauli samples.
    bool reuse_samples = true;
    /// Worker threads for parameter-shift evaluations; results do not depend on it.
    unsigned threads = 1;

    void validate() const {
        if (mode == EstimationMode::sampled && n_shot == 0) {
            throw ConfigError("n_shot must be >= 1 in sampled mode");
        }
        if (threads == 0) {
            throw ConfigError("threads must be >= 1");
        }
    }

    [[nodiscard]] bool exact() const { return mode == EstimationMode::exact; }
};

/// Estimator tags: first coordinate of every random substream key.
enum class EstimatorTag : std::uint64_t {
    energy = 1,
    nuclear_force = 2,
    parameter_force = 3,
    vqe_energy = 4,
    vqe_gradient = 5,
};

inline std::string tag_name(EstimatorTag t) {
    switch (t) {
    case EstimatorTag::energy: return "energy";
    case EstimatorTag::nuclear_force: return "nuclear_force";
    case EstimatorTag::parameter_force: return "parameter_force";
    case EstimatorTag::vqe_energy: return "vqe_energy";
    case EstimatorTag::vqe_gradient: return "vqe_gradient";
    }
    return "unknown";
}

/// Position of an estimator call inside a run; with the seed it fixes every random draw.
struct StreamContext {
    std::uint64_t step = 0;
    std::uint64_t call = 0;
};

struct EstimationResult {
    Eigen::VectorXd value;
    /// Variance of each component's estimator (f^2 for forces).
    Eigen::VectorXd variance;
    /// Full estimator covariance; set by the nuclear-force estimator.
    std::optional<Eigen::MatrixXd> covariance;
    std::uint64_t shots_used = 0;
    std::uint64_t circuits_used = 0;
};

/// Per-term outcomes of one energy evaluation, aligned with the Hamiltonian's terms.
struct PauliSampleCache {
    std::vector<SampleStats> stats;
    std::uint64_t shots = 0;
    StreamContext context{};
    bool valid = false;
};

/// Cumulative shots and circuit executions, split by estimator tag and by step.
class ResourceLedger {
  public:
    struct Usage {
        std::uint64_t shots = 0;
        std::uint64_t circuits = 0;
    };

    void record(EstimatorTag tag, const EstimationResult& r) { record(tag, r.shots_used, r.circuits_used); }

    void record(EstimatorTag tag, std::uint64_t shots, std::uint64_t circuits) {
        auto& u = by_tag_[tag_name(tag)];
        u.shots += shots;
        u.circuits += circuits;
        current_.shots += shots;
        current_.circuits += circuits;
        total_.shots += shots;
        total_.circuits += circuits;
    }

    /// Closes the current step's usage and appends it to the per-step series.
    void end_step() {
        per_step_.push_back(current_);
        current_ = {};
    }

    [[nodiscard]] const Usage& total() const { return total_; }
    [[nodiscard]] const std::vector<Usage>& per_step() const { return per_step_; }
    [[nodiscard]] const std::map<std::string, Usage>& by_tag() const { return by_tag_; }

  private:
    Usage total_{};
    Usage current_{};
    std::vector<Usage> per_step_;
    std::map<std::string, Usage> by_tag_;
};

struct LedgerReport {
    std::uint64_t n_shot_total = 0;
    std::uint64_t n_circuit_total = 0;
    std::size_t steps = 0;
    double shots_per_step = 0.0;
    double circuits_per_step = 0.0;
    std::map<std::string, ResourceLedger::Usage> by_tag;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json tags = nlohmann::json::object();
        for (const auto& [name, u] : by_tag) {
            tags[name] = {{"shots", u.shots},
                          {"circuits", u.circuits},
                          {"shots_per_step", steps > 0 ? static_cast<double>(u.shots) / static_cast<double>(steps) : 0.0},
                          {"circuits_per_step",
                           steps > 0 ? static_cast<double>(u.circuits) / static_cast<double>(steps) : 0.0}};
        }
        return {{"n_shot_total", n_shot_total},
                {"n_circuit_total", n_circuit_total},
                {"steps", steps},
                {"shots_per_step", shots_per_step},
                {"circuits_per_step", circuits_per_step},
                {"by_estimator", tags},
                {"circuit_definition",
                 "one execution per (prepared circuit, non-identity Pauli term) per estimator call"}};
    }
};

inline LedgerReport ledger_report(const ResourceLedger& ledger) {
    LedgerReport r;
    r.n_shot_total = ledger.total().shots;
    r.n_circuit_total = ledger.total().circuits;
    r.steps = ledger.per_step().size();
    if (r.steps > 0) {
        // Averages over closed steps only; evaluations after the last step
        // (e.g. the final frame) count toward the totals.
        double shots = 0.0;
        double circuits = 0.0;
        for (const auto& u : ledger.per_step()) {
            shots += static_cast<double>(u.shots);
            circuits += static_cast<double>(u.circuits);
        }
        r.shots_per_step = shots / static_cast<double>(r.steps);
        r.circuits_per_step = circuits / static_cast<double>(r.steps);
    }
    r.by_tag = ledger.by_tag();
    return r;
}

namespace detail {

/// Samples (or evaluates exactly) every term of h on psi.
inline std::vector<SampleStats> measure_terms(const QubitOperator& h, const StateVector& psi,
                                              const EstimationConfig& cfg, std::uint64_t tag,
                                              const StreamContext& ctx, std::uint64_t slot) {
    std::vector<SampleStats> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const PauliString& p = h.terms()[i].string;
        if (p.is_identity()) {
            out[i] = SampleStats{1.0, 0.0, 0};
            continue;
        }
        if (cfg.exact()) {
            out[i] = SampleStats{pauli_expectation(psi, p), 0.0, 0};
            continue;
        }
        CounterStream rng(derive_key(cfg.seed, {tag, ctx.step, ctx.call, slot, i}));
        out[i] = cfg.sampling == SamplingMethod::literal ? sample_pauli(psi, p, cfg.n_shot, rng)
                                                         : sample_parity(pauli_expectation(psi, p), cfg.n_shot, rng);
    }
    return out;
}

inline void check_parameters(const AnsatzCircuit& circuit, std::span<const double> params) {
    if (params.size() != circuit.n_parameters()) {
        throw DimensionError("ansatz expects " + std::to_string(circuit.n_parameters()) + " parameters, got " +
                             std::to_string(params.size()));
    }
}

inline std::uint64_t sampled_shots(const QubitOperator& h, const EstimationConfig& cfg) {
    return cfg.exact() ? 0 : h.non_identity_count() * cfg.n_shot;
}

inline std::uint64_t sampled_circuits(const QubitOperator& h, const EstimationConfig& cfg) {
    return cfg.exact() ? 0 : h.non_identity_count();
}

} // namespace detail

/**
 * @brief L = sum_i c_i <P_i> with variance sum_i c_i^2 s_i^2 / n_shot.
 *
 * When `cache` is given it receives the per-term outcomes for reuse by
 * estimate_nuclear_force.
 */
inline EstimationResult estimate_energy(const QubitOperator& h, const AnsatzCircuit& circuit,
                                        std::span<const double> params, const EstimationConfig& cfg,
                                        const StreamContext& ctx = {}, PauliSampleCache* cache = nullptr,
                                        EstimatorTag tag = EstimatorTag::energy) {
    detail::check_parameters(circuit, params);
    const StateVector psi = prepare_ansatz(circuit, params);
    auto stats = detail::measure_terms(h, psi, cfg, static_cast<std::uint64_t>(tag), ctx, 0);
    EstimationResult r;
    r.value = Eigen::VectorXd::Zero(1);
    r.variance = Eigen::VectorXd::Zero(1);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double c = h.terms()[i].coeff;
        r.value[0] += c * stats[i].mean;
        if (!cfg.exact()) {
            r.variance[0] += c * c * stats[i].sample_variance / static_cast<double>(cfg.n_shot);
        }
    }
    r.shots_used = detail::sampled_shots(h, cfg);
    r.circuits_used = detail::sampled_circuits(h, cfg);
    if (cache != nullptr) {
        cache->stats = std::move(stats);
        cache->shots = cfg.exact() ? 0 : cfg.n_shot;
        cache->context = ctx;
        cache->valid = true;
    }
    return r;
}

/**
 * @brief Hellmann-Feynman force F_a = -sum_i (dc_i/dR_a) <P_i>.
 *
 * In reuse mode the outcomes come from `cache` (filled by estimate_energy
 * for the same step) and no shots are spent; the shared samples make the
 * components correlated, which `covariance` records as
 * J diag(s_i^2 / n) J^T. Otherwise every component is measured afresh.
 */
inline EstimationResult estimate_nuclear_force(const ModelSnapshot& snap, const AnsatzCircuit& circuit,
                                               std::span<const double> params, const EstimationConfig& cfg,
                                               const StreamContext& ctx, const PauliSampleCache* cache) {
    detail::check_parameters(circuit, params);
    const QubitOperator& h = snap.hamiltonian;
    const Eigen::MatrixXd& j = snap.coefficient_gradient;
    if (static_cast<std::size_t>(j.cols()) != h.size()) {
        throw DimensionError("coefficient gradient does not match the Hamiltonian's term count");
    }
    const Eigen::Index n_coord = j.rows();
    const auto n_terms = static_cast<Eigen::Index>(h.size());
    EstimationResult r;
    r.value = Eigen::VectorXd::Zero(n_coord);
    r.variance = Eigen::VectorXd::Zero(n_coord);
    if (cfg.reuse_samples) {
        if (cache == nullptr || !cache->valid || cache->stats.size() != h.size() || cache->context.step != ctx.step ||
            cache->context.call != ctx.call) {
            throw DomainError("nuclear force requested without cached Pauli samples for step " +
                              std::to_string(ctx.step));
        }
        Eigen::VectorXd mean(n_terms);
        Eigen::VectorXd var(n_terms);
        for (Eigen::Index i = 0; i < n_terms; ++i) {
            const auto& s = cache->stats[static_cast<std::size_t>(i)];
            mean[i] = s.mean;
            var[i] = cfg.exact() ? 0.0 : s.sample_variance / static_cast<double>(cfg.n_shot);
        }
        r.value = -(j * mean);
        Eigen::MatrixXd cov = j * var.asDiagonal() * j.transpose();
        r.variance = cov.diagonal();
        r.covariance = std::move(cov);
        return r;
    }
    const StateVector psi = prepare_ansatz(circuit, params);
    for (Eigen::Index a = 0; a < n_coord; ++a) {
        const auto stats = detail::measure_terms(h, psi, cfg, static_cast<std::uint64_t>(EstimatorTag::nuclear_force),
                                                 ctx, static_cast<std::uint64_t>(a));
        for (Eigen::Index i = 0; i < n_terms; ++i) {
            const double d = j(a, i);
            const auto& s = stats[static_cast<std::size_t>(i)];
            r.value[a] -= d * s.mean;
            if (!cfg.exact()) {
                r.variance[a] += d * d * s.sample_variance / static_cast<double>(cfg.n_shot);
            }
        }
        r.shots_used += detail::sampled_shots(h, cfg);
        r.circuits_used += detail::sampled_circuits(h, cfg);
    }
    r.covariance = Eigen::MatrixXd(r.variance.asDiagonal());
    return r;
}

/**
 * @brief F_theta = -dL/dtheta from four shifted circuits per parameter.
 *
 * Each shifted expectation is sampled with n_shot per term; the reported
 * variance sums the weighted variances of the four shifted estimates.
 */
inline EstimationResult estimate_parameter_force(const QubitOperator& h, const AnsatzCircuit& circuit,
                                                 std::span<const double> params, const EstimationConfig& cfg,
                                                 const StreamContext& ctx = {},
                                                 EstimatorTag tag = EstimatorTag::parameter_force) {
    detail::check_parameters(circuit, params);
    const std::size_t m = params.size();
    EstimationResult r;
    r.value = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    r.variance = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));

    auto work = [&](std::size_t k) {
        const auto shifts = shifted_circuits(circuit, params, k);
        double value = 0.0;
        double variance = 0.0;
        for (std::size_t s = 0; s < shifts.size(); ++s) {
            const StateVector psi = prepare_compiled(circuit, shifts[s].angles);
            const auto stats = detail::measure_terms(h, psi, cfg, static_cast<std::uint64_t>(tag), ctx,
                                                     static_cast<std::uint64_t>(4 * k + s));
            double e = 0.0;
            double v = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) {
                const double c = h.terms()[i].coeff;
                e += c * stats[i].mean;
                if (!cfg.exact()) {
                    v += c * c * stats[i].sample_variance / static_cast<double>(cfg.n_shot);
                }
            }
            value -= shifts[s].weight * e;
            variance += shifts[s].weight * shifts[s].weight * v;
        }
        r.value[static_cast<Eigen::Index>(k)] = value;
        r.variance[static_cast<Eigen::Index>(k)] = variance;
    };

    const unsigned n_threads = std::min<unsigned>(cfg.threads, static_cast<unsigned>(m));
    if (n_threads <= 1) {
        for (std::size_t k = 0; k < m; ++k) {
            work(k);
        }
    } else {
        std::vector<std::exception_ptr> errors(n_threads);
        {
            std::vector<std::jthread> pool;
            pool.reserve(n_threads);
            for (unsigned t = 0; t < n_threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t k = t; k < m; k += n_threads) {
                            work(k);
                        }
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    r.shots_used = 4 * m * detail::sampled_shots(h, cfg);
    r.circuits_used = 4 * m * detail::sampled_circuits(h, cfg);
    return r;
}

} // namespace qcpmd
