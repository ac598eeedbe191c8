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
 * @file state_vector.hpp
 * Normalized n-qubit pure state. Basis index bit q is the computational
 * state of qubit q (qubit 0 is the least significant bit).
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcpmd/errors.hpp"

namespace qcpmd {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-9;

class StateVector {
  public:
    StateVector() = default;

    /// Computational basis state |index>.
    static StateVector basis(std::size_t n_qubits, std::uint64_t index) {
        check_qubits(n_qubits);
        const std::size_t dim = std::size_t{1} << n_qubits;
        if (index >= dim) {
            throw DimensionError("basis index " + std::to_string(index) + " out of range for " +
                                 std::to_string(n_qubits) + " qubits");
        }
        std::vector<Complex> amps(dim, Complex{0.0, 0.0});
        amps[index] = 1.0;
        return StateVector(n_qubits, std::move(amps));
    }

    /// Wraps amplitudes; the length must be a power of two and the state
    /// normalized to kNormTolerance.
    static StateVector from_amplitudes(std::vector<Complex> amps) {
        const std::size_t dim = amps.size();
        if (dim == 0 || (dim & (dim - 1)) != 0) {
            throw DimensionError("amplitude count " + std::to_string(dim) + " is not a power of two");
        }
        std::size_t n = 0;
        while ((std::size_t{1} << n) < dim) {
            ++n;
        }
        StateVector sv(n, std::move(amps));
        if (std::abs(sv.norm_squared() - 1.0) > kNormTolerance) {
            throw DomainError("state is not normalized: |psi|^2 = " + std::to_string(sv.norm_squared()));
        }
        return sv;
    }

    /// Normalizes arbitrary non-zero amplitudes.
    static StateVector normalized(std::vector<Complex> amps) {
        double norm2 = 0.0;
        for (const auto& a : amps) {
            norm2 += std::norm(a);
        }
        if (!(norm2 > 0.0)) {
            throw DomainError("cannot normalize a zero vector");
        }
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& a : amps) {
            a *= scale;
        }
        return from_amplitudes(std::move(amps));
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t dimension() const { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }
    [[nodiscard]] const Complex& operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    /// Probability of each computational basis outcome.
    [[nodiscard]] std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            p[i] = std::norm(amps_[i]);
        }
        return p;
    }

  private:
    friend class StateBuilder;

    StateVector(std::size_t n, std::vector<Complex> amps) : n_qubits_{n}, amps_{std::move(amps)} {}

    static void check_qubits(std::size_t n) {
        if (n == 0 || n > 30) {
            throw DimensionError("qubit count must be in [1, 30], got " + std::to_string(n));
        }
    }

    std::size_t n_qubits_ = 0;
    std::vector<Complex> amps_;
};

/// Mutable scratch used by circuit code; finish() hands out an immutable state.
class StateBuilder {
  public:
    explicit StateBuilder(const StateVector& start) : n_qubits_{start.n_qubits_}, amps_{start.amps_} {}

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    std::vector<Complex>& amplitudes() { return amps_; }

    StateVector finish() && { return StateVector(n_qubits_, std::move(amps_)); }

  private:
    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

} // namespace qcpmd
