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
 * @file dynamics.hpp
 * Coupled Langevin integrators: QCPMD (nuclei and ansatz parameters) and
 * the VQE-based MD baseline, with friction fixed by the sampled force
 * variances through the fluctuation-dissipation relation.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/errors.hpp"
#include "qcpmd/estimator.hpp"
#include "qcpmd/model.hpp"
#include "qcpmd/optimize.hpp"
#include "qcpmd/qsim.hpp"
#include "qcpmd/random.hpp"

namespace qcpmd {

enum class Thermostat { fdt, off };

/// covariance: friction matrix from the full force covariance; diagonal: per-component gamma only.
enum class FrictionModel { covariance, diagonal };

/// All quantities in atomic units.
struct LangevinConfig {
    double dt = 0.0;
    double beta = 0.0;
    /// Per nuclear coordinate.
    Eigen::VectorXd masses;
    /// Per ansatz parameter.
    Eigen::VectorXd mu;
    std::uint64_t n_steps = 0;
    Thermostat thermostat = Thermostat::fdt;
    FrictionModel friction = FrictionModel::covariance;
    EstimationConfig estimation;

    void validate(std::size_t n_coordinates, std::size_t n_parameters) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ConfigError("dt must be positive");
        }
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw ConfigError("temperature must be positive");
        }
        if (static_cast<std::size_t>(masses.size()) != n_coordinates || !(masses.array() > 0.0).all()) {
            throw ConfigError("need one positive mass per nuclear coordinate");
        }
        if (static_cast<std::size_t>(mu.size()) != n_parameters || !(mu.array() > 0.0).all()) {
            throw ConfigError("need one positive virtual mass per ansatz parameter");
        }
        estimation.validate();
    }
};

struct MDState {
    Eigen::VectorXd R;     // bohr
    Eigen::VectorXd v;     // bohr / atu
    Eigen::VectorXd theta; // rad
    Eigen::VectorXd xi;    // rad / atu
    std::uint64_t step = 0;
    double time = 0.0; // atu
};

inline MDState initial_state(Eigen::VectorXd r, Eigen::VectorXd theta) {
    MDState s;
    s.v = Eigen::VectorXd::Zero(r.size());
    s.xi = Eigen::VectorXd::Zero(theta.size());
    s.R = std::move(r);
    s.theta = std::move(theta);
    return s;
}

struct ThermostatState {
    Eigen::VectorXd gamma_diag;
    Eigen::VectorXd zeta_diag;
};

namespace detail {

inline void require_nonnegative_finite(const Eigen::VectorXd& x, const char* what) {
    if (!x.allFinite() || (x.array() < 0.0).any()) {
        throw DomainError(std::string(what) + " must be finite and non-negative");
    }
}

} // namespace detail

/**
 * @brief gamma = f^2 beta dt / (2 m), zeta = f_theta^2 beta dt / (2 mu).
 * @throws NumericalAbort when gamma dt >= 1 or zeta dt >= 1.
 */
inline ThermostatState fdt_coefficients(const Eigen::VectorXd& force_var, const Eigen::VectorXd& param_force_var,
                                        double beta, double dt, const Eigen::VectorXd& masses,
                                        const Eigen::VectorXd& mu) {
    if (force_var.size() != masses.size() || param_force_var.size() != mu.size()) {
        throw DimensionError("variance and mass vectors differ in length");
    }
    detail::require_nonnegative_finite(force_var, "force variance");
    detail::require_nonnegative_finite(param_force_var, "parameter force variance");
    ThermostatState t;
    t.gamma_diag = force_var.cwiseQuotient(masses) * (beta * dt / 2.0);
    t.zeta_diag = param_force_var.cwiseQuotient(mu) * (beta * dt / 2.0);
    const double g = t.gamma_diag.size() > 0 ? t.gamma_diag.maxCoeff() * dt : 0.0;
    const double z = t.zeta_diag.size() > 0 ? t.zeta_diag.maxCoeff() * dt : 0.0;
    if (g >= 1.0 || z >= 1.0) {
        std::ostringstream msg;
        msg << "stability guard violated: max gamma*dt = " << g << ", max zeta*dt = " << z
            << " (increase n_shot or reduce dt)";
        throw NumericalAbort(msg.str());
    }
    return t;
}

/**
 * @brief Friction matrix Gamma = (beta dt / 2) M^{-1} Sigma_F.
 *
 * Its diagonal is the per-component gamma. Gamma M^{-1} is symmetric, so
 * the stationary velocity covariance is M^{-1} / beta for correlated noise.
 * @throws NumericalAbort when the largest eigenvalue of Gamma dt reaches 1.
 */
inline Eigen::MatrixXd friction_matrix(const Eigen::MatrixXd& force_cov, double beta, double dt,
                                       const Eigen::VectorXd& masses) {
    if (force_cov.rows() != masses.size() || force_cov.cols() != masses.size()) {
        throw DimensionError("force covariance does not match the coordinate count");
    }
    if (!force_cov.allFinite()) {
        throw NumericalAbort("force covariance is not finite");
    }
    const Eigen::VectorXd inv_sqrt_m = masses.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd sym = inv_sqrt_m.asDiagonal() * force_cov * inv_sqrt_m.asDiagonal() * (beta * dt / 2.0);
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (top * dt >= 1.0) {
        std::ostringstream msg;
        msg << "stability guard violated: largest friction eigenvalue * dt = " << top * dt
            << " (increase n_shot or reduce dt)";
        throw NumericalAbort(msg.str());
    }
    return masses.cwiseInverse().asDiagonal() * force_cov * (beta * dt / 2.0);
}

/// Euler-Maruyama velocity update v - dt Gamma v + dt F / m.
inline Eigen::VectorXd langevin_velocity(const Eigen::VectorXd& v, const Eigen::VectorXd& force,
                                         const Eigen::MatrixXd& gamma, const Eigen::VectorXd& masses, double dt) {
    return v - dt * (gamma * v) + dt * force.cwiseQuotient(masses);
}

inline Eigen::VectorXd langevin_velocity(const Eigen::VectorXd& v, const Eigen::VectorXd& force,
                                         const Eigen::VectorXd& gamma_diag, const Eigen::VectorXd& masses,
                                         double dt) {
    return v - dt * gamma_diag.cwiseProduct(v) + dt * force.cwiseQuotient(masses);
}

/// Estimates at (theta^k, R^k) that drive step k.
struct Observation {
    std::uint64_t step = 0;
    double energy = 0.0;
    double energy_variance = 0.0;
    Eigen::VectorXd force;
    Eigen::VectorXd force_variance;
    Eigen::MatrixXd force_covariance;
    /// VQE-MD only: optimizer diverged and the previous theta was kept.
    bool flagged = false;
    int optimizer_iterations = 0;
};

/// Per-step thermostat and parameter-force record, filled by advance().
struct StepRecord {
    ThermostatState thermostat;
    Eigen::VectorXd param_force;
    Eigen::VectorXd param_force_variance;
};

namespace detail {

inline void check_finite_state(const MDState& s) {
    auto bad = [](const Eigen::VectorXd& x) { return !x.allFinite(); };
    if (bad(s.R) || bad(s.v) || bad(s.theta) || bad(s.xi) || !std::isfinite(s.time)) {
        std::ostringstream msg;
        msg << "non-finite state at step " << s.step << ": R = [" << s.R.transpose() << "], v = ["
            << s.v.transpose() << "]";
        throw NumericalAbort(msg.str());
    }
}

/// Keeps the snapshot of the most recent geometry, keyed bitwise on R.
template <HamiltonianModel Model>
class SnapshotCache {
  public:
    explicit SnapshotCache(const Model& model) : model_{&model} {}

    const ModelSnapshot& at(const Eigen::VectorXd& r) {
        if (!key_ || key_->size() != r.size() || *key_ != r) {
            snap_ = model_->snapshot(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
            key_ = r;
        }
        return snap_;
    }

  private:
    const Model* model_;
    std::optional<Eigen::VectorXd> key_;
    ModelSnapshot snap_;
};

template <HamiltonianModel Model>
class LangevinBase {
  public:
    LangevinBase(const Model& model, AnsatzCircuit circuit, LangevinConfig cfg)
        : model_{model}, circuit_{std::move(circuit)}, cfg_{std::move(cfg)}, snapshots_{model} {
        cfg_.validate(model.n_coordinates(), circuit_.n_parameters());
        if (model.n_qubits() != circuit_.n_qubits()) {
            throw DimensionError("ansatz and Hamiltonian qubit counts differ");
        }
    }

    [[nodiscard]] const LangevinConfig& config() const { return cfg_; }
    [[nodiscard]] const AnsatzCircuit& circuit() const { return circuit_; }
    [[nodiscard]] ResourceLedger& ledger() { return ledger_; }
    [[nodiscard]] const ResourceLedger& ledger() const { return ledger_; }
    [[nodiscard]] const StepRecord& last_step() const { return record_; }

  protected:
    [[nodiscard]] std::span<const double> span(const Eigen::VectorXd& x) const {
        return {x.data(), static_cast<std::size_t>(x.size())};
    }

    /// Energy and Hellmann-Feynman force at (theta, R), sharing one set of Pauli samples.
    Observation measure(const Eigen::VectorXd& r, const Eigen::VectorXd& theta, std::uint64_t step) {
        const ModelSnapshot& snap = snapshots_.at(r);
        const StreamContext ctx{step, 0};
        PauliSampleCache cache;
        const auto e = estimate_energy(snap.hamiltonian, circuit_, span(theta), cfg_.estimation, ctx, &cache);
        const auto f = estimate_nuclear_force(snap, circuit_, span(theta), cfg_.estimation, ctx, &cache);
        ledger_.record(EstimatorTag::energy, e);
        ledger_.record(EstimatorTag::nuclear_force, f);
        Observation obs;
        obs.step = step;
        obs.energy = e.value[0];
        obs.energy_variance = e.variance[0];
        obs.force = f.value;
        obs.force_variance = f.variance;
        obs.force_covariance = *f.covariance;
        return obs;
    }

    [[nodiscard]] bool thermostat_active() const {
        return cfg_.thermostat == Thermostat::fdt && !cfg_.estimation.exact();
    }

    /// Nuclear half of the update; returns (v^{k+1}, R^{k+1}).
    void advance_nuclei(const MDState& s, const Observation& obs, MDState& next) {
        const double dt = cfg_.dt;
        if (!thermostat_active()) {
            next.v = s.v + dt * obs.force.cwiseQuotient(cfg_.masses);
            record_.thermostat.gamma_diag = Eigen::VectorXd::Zero(s.v.size());
        } else if (cfg_.friction == FrictionModel::covariance) {
            const Eigen::MatrixXd gamma = friction_matrix(obs.force_covariance, cfg_.beta, dt, cfg_.masses);
            record_.thermostat.gamma_diag = gamma.diagonal();
            next.v = langevin_velocity(s.v, obs.force, gamma, cfg_.masses, dt);
        } else {
            const auto t = fdt_coefficients(obs.force_variance, Eigen::VectorXd::Zero(cfg_.mu.size()), cfg_.beta, dt,
                                            cfg_.masses, cfg_.mu);
            record_.thermostat.gamma_diag = t.gamma_diag;
            next.v = langevin_velocity(s.v, obs.force, t.gamma_diag, cfg_.masses, dt);
        }
        // Positions advance with the updated velocity (symplectic Euler ordering).
        next.R = s.R + dt * next.v;
        next.step = s.step + 1;
        next.time = static_cast<double>(next.step) * dt;
    }

    const Model& model_;
    AnsatzCircuit circuit_;
    LangevinConfig cfg_;
    SnapshotCache<Model> snapshots_;
    ResourceLedger ledger_;
    StepRecord record_;
};

} // namespace detail

/**
 * @brief QCPMD: nuclei and ansatz parameters both follow Langevin dynamics
 * driven by sampled forces; parameters are never re-optimized.
 */
template <HamiltonianModel Model>
class QcpmdIntegrator : public detail::LangevinBase<Model> {
    using Base = detail::LangevinBase<Model>;

  public:
    using Base::Base;

    /// Estimates at the current state; cached so step() does not resample.
    const Observation& observe(MDState& s) {
        if (!obs_ || obs_->step != s.step) {
            obs_ = this->measure(s.R, s.theta, s.step);
        }
        return *obs_;
    }

    /**
     * One Euler-Maruyama step: forces at (theta^k, R^k), nuclear update,
     * parameter force and its variance at (theta^k, R^{k+1}), parameter update.
     */
    MDState step(MDState s) {
        const Observation obs = observe(s);
        MDState next;
        this->advance_nuclei(s, obs, next);

        const ModelSnapshot& snap_next = this->snapshots_.at(next.R);
        const auto fp = estimate_parameter_force(snap_next.hamiltonian, this->circuit_, this->span(s.theta),
                                                 this->cfg_.estimation, StreamContext{s.step, 0});
        this->ledger_.record(EstimatorTag::parameter_force, fp);
        this->record_.param_force = fp.value;
        this->record_.param_force_variance = fp.variance;

        const double dt = this->cfg_.dt;
        Eigen::VectorXd zeta = Eigen::VectorXd::Zero(s.xi.size());
        if (this->thermostat_active()) {
            zeta = fdt_coefficients(Eigen::VectorXd::Zero(this->cfg_.masses.size()), fp.variance, this->cfg_.beta,
                                    dt, this->cfg_.masses, this->cfg_.mu)
                       .zeta_diag;
        }
        this->record_.thermostat.zeta_diag = zeta;
        next.xi = langevin_velocity(s.xi, fp.value, zeta, this->cfg_.mu, dt);
        next.theta = s.theta + dt * next.xi;
        this->ledger_.end_step();
        detail::check_finite_state(next);
        return next;
    }

  private:
    std::optional<Observation> obs_;
};

/// Budget for the per-step VQE re-optimization.
struct VqeOptions {
    int max_iterations = 50;
    double gradient_tolerance = 1e-5;
    /// A re-optimized theta further than this from the warm start is treated as divergence.
    double max_jump = 3.141592653589793;
};

/**
 * @brief VQE-based MD: theta is re-optimized by BFGS on sampled energies and
 * gradients at every step; nuclei follow the same Langevin update as QCPMD.
 */
template <HamiltonianModel Model>
class VqeMdIntegrator : public detail::LangevinBase<Model> {
    using Base = detail::LangevinBase<Model>;

  public:
    VqeMdIntegrator(const Model& model, AnsatzCircuit circuit, LangevinConfig cfg, VqeOptions vqe = {})
        : Base(model, std::move(circuit), std::move(cfg)), vqe_{vqe} {}

    /// Re-optimizes theta in place (warm start), then estimates energy and force.
    const Observation& observe(MDState& s) {
        if (obs_ && obs_->step == s.step) {
            return *obs_;
        }
        const ModelSnapshot& snap = this->snapshots_.at(s.R);
        const QubitOperator h = snap.hamiltonian;
        std::uint64_t call = 1;
        const auto& est = this->cfg_.estimation;
        Objective objective{
            [&](const Eigen::VectorXd& th) {
                const auto e = estimate_energy(h, this->circuit_, this->span(th), est, StreamContext{s.step, call++},
                                               nullptr, EstimatorTag::vqe_energy);
                this->ledger_.record(EstimatorTag::vqe_energy, e);
                return e.value[0];
            },
            [&](const Eigen::VectorXd& th) {
                const auto f = estimate_parameter_force(h, this->circuit_, this->span(th), est,
                                                        StreamContext{s.step, call++}, EstimatorTag::vqe_gradient);
                this->ledger_.record(EstimatorTag::vqe_gradient, f);
                return Eigen::VectorXd(-f.value);
            }};
        BfgsOptions opts;
        opts.max_iterations = vqe_.max_iterations;
        opts.gradient_tolerance = vqe_.gradient_tolerance;
        const BfgsResult res = bfgs_minimize(objective, s.theta, opts);
        bool flagged = res.status == BfgsStatus::non_finite || !res.x.allFinite() ||
                       (res.x - s.theta).norm() > vqe_.max_jump;
        if (!flagged) {
            s.theta = res.x;
        }
        obs_ = this->measure(s.R, s.theta, s.step);
        obs_->flagged = flagged;
        obs_->optimizer_iterations = res.iterations;
        return *obs_;
    }

    MDState step(MDState s) {
        const Observation obs = observe(s);
        MDState next;
        this->advance_nuclei(s, obs, next);
        next.theta = s.theta;
        next.xi = Eigen::VectorXd::Zero(s.xi.size());
        this->ledger_.end_step();
        detail::check_finite_state(next);
        return next;
    }

  private:
    VqeOptions vqe_;
    std::optional<Observation> obs_;
};

/// One persisted trajectory row.
struct Frame {
    std::uint64_t step = 0;
    double time = 0.0;
    Eigen::VectorXd R;
    Eigen::VectorXd v;
    Eigen::VectorXd theta;
    Eigen::VectorXd xi;
    double energy = 0.0;
    double energy_variance = 0.0;
    Eigen::VectorXd force;
    Eigen::VectorXd force_variance;
    bool flagged = false;
};

using FrameSink = std::function<void(const Frame&)>;

inline Frame make_frame(const MDState& s, const Observation& o) {
    return Frame{s.step, s.time, s.R, s.v, s.theta, s.xi, o.energy, o.energy_variance, o.force, o.force_variance,
                 o.flagged};
}

struct RunSummary {
    MDState final_state;
    std::uint64_t steps_completed = 0;
    std::uint64_t frames_written = 0;
    std::uint64_t flagged_frames = 0;
};

/**
 * @brief Runs n_steps of `integrator` from `state`, emitting every
 * `stride`-th frame (including step 0) to `sink`.
 *
 * Frames already emitted stay with the sink if a step throws.
 */
template <class Integrator>
RunSummary run_dynamics(Integrator& integrator, MDState state, std::uint64_t n_steps, std::uint64_t stride,
                        const FrameSink& sink) {
    if (stride == 0) {
        throw ConfigError("stride must be >= 1");
    }
    RunSummary summary;
    for (std::uint64_t k = 0; k <= n_steps; ++k) {
        const Observation& obs = integrator.observe(state);
        if (obs.flagged) {
            ++summary.flagged_frames;
        }
        if (state.step % stride == 0) {
            sink(make_frame(state, obs));
            ++summary.frames_written;
        }
        if (k == n_steps) {
            break;
        }
        state = integrator.step(state);
        ++summary.steps_completed;
    }
    summary.final_state = std::move(state);
    return summary;
}

struct InitOptions {
    std::uint64_t seed = 0;
    int starts = 8;
    double spread = 0.5; // std of the random starting angles, rad
    double gradient_tolerance = 1e-6;
    int max_iterations = 1000;
};

struct InitResult {
    Eigen::VectorXd theta;
    double energy = 0.0;
    double gradient_norm = 0.0;
    int start_index = 0;
};

/**
 * @brief Exact-mode BFGS minimization of L(theta, R0) from seeded random starts.
 *
 * The reference state is a stationary point (all single-excitation
 * gradients vanish there), so starts are drawn around it rather than at it.
 * @throws ConvergenceError when no start reaches the gradient tolerance.
 */
inline InitResult initialize_parameters(const QubitOperator& h, const AnsatzCircuit& circuit,
                                        const InitOptions& opts = {}) {
    EstimationConfig exact;
    exact.mode = EstimationMode::exact;
    const std::size_t m = circuit.n_parameters();
    Objective obj{[&](const Eigen::VectorXd& th) {
                      return estimate_energy(h, circuit, {th.data(), m}, exact).value[0];
                  },
                  [&](const Eigen::VectorXd& th) {
                      return Eigen::VectorXd(-estimate_parameter_force(h, circuit, {th.data(), m}, exact).value);
                  }};
    BfgsOptions bopts;
    bopts.gradient_tolerance = opts.gradient_tolerance;
    bopts.max_iterations = opts.max_iterations;
    std::optional<InitResult> best;
    double best_grad = std::numeric_limits<double>::infinity();
    for (int start = 0; start < opts.starts; ++start) {
        CounterStream rng(derive_key(opts.seed, {0x1a17, static_cast<std::uint64_t>(start)}));
        Eigen::VectorXd x0(static_cast<Eigen::Index>(m));
        for (Eigen::Index k = 0; k < x0.size(); ++k) {
            x0[k] = opts.spread * rng.normal();
        }
        const BfgsResult r = bfgs_minimize(obj, x0, bopts);
        best_grad = std::min(best_grad, r.gradient.norm());
        if (r.status != BfgsStatus::converged) {
            continue;
        }
        if (!best || r.value < best->energy - 1e-12) {
            best = InitResult{r.x, r.value, r.gradient.norm(), start};
        }
    }
    if (!best) {
        std::ostringstream msg;
        msg << "parameter initialization stalled: best gradient norm " << best_grad << " after " << opts.starts
            << " starts";
        throw ConvergenceError(msg.str());
    }
    return *best;
}

} // namespace qcpmd
