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
 * @file qsim.hpp
 * Statevector simulation of the real particle-conserving ansatz and
 * shot-based estimation of Pauli expectation values.
 *
 * Each gate A_k(theta) on qubits (q, q+1) is the real particle-conserving
 * exchange gate: on (|q=1,q+1=0>, |q=0,q+1=1>) it acts as the reflection
 * [[cos, sin], [sin, -cos]], and it leaves |00>, |11> alone. It is compiled
 * as two commuting Pauli rotations followed by a fixed phase gate,
 *   A(theta) = F R_XY(-theta) R_YX(theta),  R_P(a) = exp(-i a P / 2),
 * with P = X_q Y_{q+1}, Y_q X_{q+1} and F = -1 on |q=0,q+1=1> only. Each
 * compiled rotation obeys the exact +-pi/2 shift rule, which is what the
 * gradient code exploits. Unlike a plain Givens rotation, F makes the gate
 * interacting, so products of these gates reach correlated states.
 */
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcpmd/errors.hpp"
#include "qcpmd/operator.hpp"
#include "qcpmd/random.hpp"
#include "qcpmd/state_vector.hpp"

namespace qcpmd {

class AnsatzCircuit {
  public:
    AnsatzCircuit() = default;

    /// @param gate_lower_qubits gate k acts on (gate_lower_qubits[k], +1).
    AnsatzCircuit(std::size_t n_qubits, std::vector<std::size_t> gate_lower_qubits, std::uint64_t reference,
                  std::size_t depth)
        : n_qubits_{n_qubits}, gates_{std::move(gate_lower_qubits)}, reference_{reference}, depth_{depth} {
        if (n_qubits < 2 || n_qubits > 30) {
            throw DimensionError("ansatz needs between 2 and 30 qubits");
        }
        if (reference >= (std::uint64_t{1} << n_qubits)) {
            throw DimensionError("reference bitstring does not fit in " + std::to_string(n_qubits) + " qubits");
        }
        for (auto q : gates_) {
            if (q + 1 >= n_qubits) {
                throw DimensionError("gate on qubit pair (" + std::to_string(q) + "," + std::to_string(q + 1) +
                                     ") exceeds register");
            }
        }
    }

    /// Brick layout: every layer applies gates on (0,1), (1,2), ..., (n-2,n-1).
    static AnsatzCircuit brick(std::size_t n_qubits, std::size_t depth, std::uint64_t reference) {
        std::vector<std::size_t> gates;
        for (std::size_t layer = 0; layer < depth; ++layer) {
            for (std::size_t q = 0; q + 1 < n_qubits; ++q) {
                gates.push_back(q);
            }
        }
        return AnsatzCircuit(n_qubits, std::move(gates), reference, depth);
    }

    /// Reference with the lowest n_electrons spin orbitals occupied.
    static std::uint64_t lowest_occupation(std::size_t n_electrons) {
        return n_electrons == 0 ? 0 : ((std::uint64_t{1} << n_electrons) - 1);
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t n_parameters() const { return gates_.size(); }
    [[nodiscard]] std::size_t depth() const { return depth_; }
    [[nodiscard]] std::uint64_t reference() const { return reference_; }
    [[nodiscard]] const std::vector<std::size_t>& gates() const { return gates_; }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json pairs = nlohmann::json::array();
        for (auto q : gates_) {
            pairs.push_back({q, q + 1});
        }
        std::string ref(n_qubits_, '0');
        for (std::size_t q = 0; q < n_qubits_; ++q) {
            ref[n_qubits_ - 1 - q] = ((reference_ >> q) & 1U) != 0 ? '1' : '0';
        }
        return {{"gate", "real particle-conserving exchange gate [[cos, sin], [sin, -cos]] on (|q=1>, |q+1=1>)"},
                {"compiled_as", "F exp(-i a X_q Y_q+1 / 2) exp(-i b Y_q X_q+1 / 2), a = -theta, b = theta, "
                                "F = -1 on |q=0, q+1=1>"},
                {"shift_rule", "four circuits per parameter, +-pi/2 on a and on b, weights 1/2"},
                {"n_qubits", n_qubits_},
                {"depth", depth_},
                {"n_parameters", gates_.size()},
                {"gate_pairs", pairs},
                {"reference_bitstring", ref},
                {"bit_order", "rightmost character is qubit 0"}};
    }

  private:
    std::size_t n_qubits_ = 0;
    std::vector<std::size_t> gates_;
    std::uint64_t reference_ = 0;
    std::size_t depth_ = 0;
};

/// Angles of the compiled circuit: gate k uses F R_XY(xy[k]) R_YX(yx[k]).
struct CompiledAngles {
    std::vector<double> xy;
    std::vector<double> yx;

    static CompiledAngles from_parameters(std::span<const double> theta) {
        CompiledAngles a;
        a.xy.resize(theta.size());
        a.yx.assign(theta.begin(), theta.end());
        for (std::size_t k = 0; k < theta.size(); ++k) {
            a.xy[k] = -theta[k];
        }
        return a;
    }
};

namespace detail {

/// Real rotation of the pairs (lo, hi) by angle: lo -> c lo + s hi, hi -> c hi - s lo.
inline void rotate_pair(std::vector<Complex>& amps, std::uint64_t lo, std::uint64_t hi, double c, double s) {
    const Complex a = amps[lo];
    const Complex b = amps[hi];
    amps[lo] = c * a - s * b;
    amps[hi] = s * a + c * b;
}

/**
 * Applies F R_XY(a) R_YX(b) on (q, q+1). The rotations act as real
 * rotations on (|00>, |11>) by (a + b) / 2 and on (|q=1>, |q+1=1>) by
 * (a - b) / 2; F then negates the |q+1=1> component.
 */
inline void apply_compiled_gate(std::vector<Complex>& amps, std::size_t q, double a, double b) {
    const std::uint64_t bit_lo = std::uint64_t{1} << q;
    const std::uint64_t bit_hi = std::uint64_t{1} << (q + 1);
    const double even = 0.5 * (a + b);
    const double odd = 0.5 * (a - b);
    const double c_even = std::cos(even);
    const double s_even = std::sin(even);
    const double c_odd = std::cos(odd);
    const double s_odd = std::sin(odd);
    const bool do_even = even != 0.0;
    for (std::uint64_t base = 0; base < amps.size(); ++base) {
        if ((base & (bit_lo | bit_hi)) != 0) {
            continue;
        }
        if (do_even) {
            rotate_pair(amps, base, base | bit_lo | bit_hi, c_even, s_even);
        }
        rotate_pair(amps, base | bit_lo, base | bit_hi, c_odd, s_odd);
        amps[base | bit_hi] = -amps[base | bit_hi];
    }
}

} // namespace detail

/// Reference state with the compiled rotations applied in layout order.
inline StateVector prepare_compiled(const AnsatzCircuit& circuit, const CompiledAngles& angles) {
    const std::size_t m = circuit.n_parameters();
    if (angles.xy.size() != m || angles.yx.size() != m) {
        throw DimensionError("compiled angle count does not match " + std::to_string(m) + " gates");
    }
    StateBuilder builder(StateVector::basis(circuit.n_qubits(), circuit.reference()));
    auto& amps = builder.amplitudes();
    for (std::size_t k = 0; k < m; ++k) {
        detail::apply_compiled_gate(amps, circuit.gates()[k], angles.xy[k], angles.yx[k]);
    }
    return std::move(builder).finish();
}

/// |psi(theta)> = A_M(theta_M) ... A_1(theta_1) |reference>.
inline StateVector prepare_ansatz(const AnsatzCircuit& circuit, std::span<const double> params) {
    if (params.size() != circuit.n_parameters()) {
        throw DimensionError("ansatz expects " + std::to_string(circuit.n_parameters()) + " parameters, got " +
                             std::to_string(params.size()));
    }
    return prepare_compiled(circuit, CompiledAngles::from_parameters(params));
}

/// One term of an exact shift rule: d<H>/dtheta_k = sum_j weight_j <H>(angles_j).
struct ShiftedCircuit {
    CompiledAngles angles;
    double weight = 0.0;
};

/**
 * @brief Shifted circuits for the derivative with respect to theta_k.
 *
 * Theta_k enters the compiled circuit twice (a = -theta, b = theta), so the
 * derivative is dE/db - dE/da, each term a +-pi/2 shift with weight 1/2.
 * The first two entries shift a, the last two shift b.
 */
inline std::array<ShiftedCircuit, 4> shifted_circuits(const AnsatzCircuit& circuit, std::span<const double> params,
                                                      std::size_t k) {
    if (params.size() != circuit.n_parameters()) {
        throw DimensionError("ansatz expects " + std::to_string(circuit.n_parameters()) + " parameters, got " +
                             std::to_string(params.size()));
    }
    if (k >= params.size()) {
        throw DimensionError("gate index " + std::to_string(k) + " out of range [0, " +
                             std::to_string(params.size()) + ")");
    }
    constexpr double shift = std::numbers::pi / 2.0;
    const CompiledAngles base = CompiledAngles::from_parameters(params);
    std::array<ShiftedCircuit, 4> out{ShiftedCircuit{base, -0.5}, ShiftedCircuit{base, 0.5},
                                      ShiftedCircuit{base, 0.5}, ShiftedCircuit{base, -0.5}};
    out[0].angles.xy[k] += shift;
    out[1].angles.xy[k] -= shift;
    out[2].angles.yx[k] += shift;
    out[3].angles.yx[k] -= shift;
    return out;
}

/// Exact <psi|P|psi>.
inline double exact_pauli(const StateVector& state, const PauliString& p) { return pauli_expectation(state, p); }

/// Outcome statistics of repeated single-shot Pauli measurements.
struct SampleStats {
    double mean = 0.0;
    /// Variance of a single +-1 outcome (unbiased, n - 1 denominator).
    double sample_variance = 0.0;
    std::uint64_t shots = 0;

    /// From the number of +1 outcomes among `shots`.
    static SampleStats from_counts(std::uint64_t plus, std::uint64_t shots) {
        SampleStats s;
        s.shots = shots;
        const double n = static_cast<double>(shots);
        s.mean = (2.0 * static_cast<double>(plus) - n) / n;
        const double spread = std::max(0.0, 1.0 - s.mean * s.mean);
        s.sample_variance = shots >= 2 ? n / (n - 1.0) * spread : spread;
        return s;
    }
};

namespace detail {

/// Maps the eigenbasis of p onto the computational basis: H on X qubits,
/// S^dagger then H on Y qubits.
inline std::vector<Complex> rotate_to_eigenbasis(const StateVector& state, const PauliString& p) {
    std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
    const double r = 1.0 / std::numbers::sqrt2;
    for (std::size_t q = 0; q < p.n_qubits(); ++q) {
        const PauliAxis axis = p.axis(q);
        if (axis != PauliAxis::X && axis != PauliAxis::Y) {
            continue;
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & bit) != 0) {
                continue;
            }
            Complex a0 = amps[i];
            Complex a1 = amps[i | bit];
            if (axis == PauliAxis::Y) {
                a1 *= Complex{0.0, -1.0};
            }
            amps[i] = r * (a0 + a1);
            amps[i | bit] = r * (a0 - a1);
        }
    }
    return amps;
}

} // namespace detail

/**
 * @brief Samples `shots` projective measurements of p.
 *
 * Rotates into the eigenbasis of p, draws computational basis bitstrings by
 * inverse CDF, and maps each to the eigenvalue (-1)^{parity on support}.
 * The identity returns mean 1 and variance 0 without drawing.
 */
inline SampleStats sample_pauli(const StateVector& state, const PauliString& p, std::uint64_t shots,
                                CounterStream& rng) {
    if (shots == 0) {
        throw DomainError("shots must be at least 1");
    }
    if (p.n_qubits() != state.n_qubits()) {
        throw DimensionError("Pauli string and state qubit counts differ");
    }
    if (p.is_identity()) {
        return SampleStats{1.0, 0.0, shots};
    }
    const auto amps = detail::rotate_to_eigenbasis(state, p);
    std::vector<double> cdf(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    const std::uint64_t support = p.support();
    std::uint64_t plus = 0;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) {
            --it;
        }
        const auto index = static_cast<std::uint64_t>(it - cdf.begin());
        if (std::popcount(index & support) % 2 == 0) {
            ++plus;
        }
    }
    return SampleStats::from_counts(plus, shots);
}

/**
 * @brief Samples the +-1 outcome of p directly from its exact expectation.
 *
 * The parity of a bitstring drawn in the eigenbasis is +1 with probability
 * (1 + <P>) / 2, so this has the same distribution as sample_pauli at a
 * fraction of the cost.
 */
inline SampleStats sample_parity(double expectation, std::uint64_t shots, CounterStream& rng) {
    if (shots == 0) {
        throw DomainError("shots must be at least 1");
    }
    const double p_plus = std::clamp(0.5 * (1.0 + expectation), 0.0, 1.0);
    std::uint64_t plus = 0;
    for (std::uint64_t s = 0; s < shots; ++s) {
        plus += rng.uniform() < p_plus ? 1U : 0U;
    }
    return SampleStats::from_counts(plus, shots);
}

/// Total particle number <N> = sum_q <(1 - Z_q) / 2>.
inline double particle_number(const StateVector& state) {
    double n = 0.0;
    const auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        n += std::norm(amps[i]) * std::popcount(i);
    }
    return n;
}

} // namespace qcpmd
