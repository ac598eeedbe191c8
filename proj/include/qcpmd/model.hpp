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
 * @file model.hpp
 * Geometry-dependent qubit Hamiltonian interface consumed by the estimators
 * and integrators.
 */
#pragma once

#include <concepts>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/operator.hpp"

namespace qcpmd {

/// H(R) and dc_i/dR_a for every term i of H(R).
struct ModelSnapshot {
    QubitOperator hamiltonian{1};
    /// Rows are nuclear coordinates, columns follow hamiltonian.terms().
    Eigen::MatrixXd coefficient_gradient;
};

template <class M>
concept HamiltonianModel = requires(const M& m, std::span<const double> r) {
    { m.snapshot(r) } -> std::convertible_to<ModelSnapshot>;
    { m.n_coordinates() } -> std::convertible_to<std::size_t>;
    { m.n_qubits() } -> std::convertible_to<std::size_t>;
};

} // namespace qcpmd
