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
 * @file rhf.hpp
 * Closed-shell Roothaan-Hall SCF in a symmetrically orthogonalized basis.
 */
#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qcpmd/chem/integrals.hpp"
#include "qcpmd/errors.hpp"

namespace qcpmd::chem {

struct RhfOptions {
    int max_iterations = 200;
    double density_tolerance = 1e-10;
};

struct RhfResult {
    Eigen::VectorXd orbital_energies;
    /// Columns are MOs; C^T S C = I.
    Eigen::MatrixXd coefficients;
    Eigen::MatrixXd density; // P = 2 C_occ C_occ^T
    double energy = 0.0;     // includes nuclear repulsion
    int iterations = 0;
};

namespace detail {

/// Flips each column so its first significant entry is positive.
inline void fix_mo_signs(Eigen::MatrixXd& c) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            if (std::abs(c(i, k)) > 1e-6) {
                if (c(i, k) < 0.0) {
                    c.col(k) *= -1.0;
                }
                break;
            }
        }
    }
}

inline Eigen::MatrixXd fock_matrix(const MolecularIntegrals& ints, const Eigen::MatrixXd& p) {
    const auto n = static_cast<Eigen::Index>(ints.n);
    Eigen::MatrixXd f = ints.core;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double g = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                for (Eigen::Index l = 0; l < n; ++l) {
                    const auto ui = static_cast<std::size_t>(i);
                    const auto uj = static_cast<std::size_t>(j);
                    const auto uk = static_cast<std::size_t>(k);
                    const auto ul = static_cast<std::size_t>(l);
                    g += p(k, l) * (ints.eri_at(ui, uj, uk, ul) - 0.5 * ints.eri_at(ui, uk, uj, ul));
                }
            }
            f(i, j) += g;
        }
    }
    return f;
}

} // namespace detail

inline RhfResult run_rhf(const MolecularIntegrals& ints, std::size_t n_electrons, const RhfOptions& opts = {}) {
    if (n_electrons % 2 != 0) {
        throw DomainError("RHF requires an even electron count, got " + std::to_string(n_electrons));
    }
    const std::size_t n_occ = n_electrons / 2;
    if (n_occ > ints.n) {
        throw DomainError("basis of size " + std::to_string(ints.n) + " cannot hold " + std::to_string(n_electrons) +
                          " electrons");
    }
    const auto nocc = static_cast<Eigen::Index>(n_occ);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s_eig(ints.overlap);
    if (s_eig.eigenvalues().minCoeff() <= 0.0) {
        throw DomainError("overlap matrix is not positive definite");
    }
    const Eigen::MatrixXd x = s_eig.eigenvectors() * s_eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                              s_eig.eigenvectors().transpose();

    auto diagonalize = [&](const Eigen::MatrixXd& f, RhfResult& out) {
        const Eigen::MatrixXd fo = x.transpose() * f * x;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fo);
        out.orbital_energies = eig.eigenvalues();
        out.coefficients = x * eig.eigenvectors();
        detail::fix_mo_signs(out.coefficients);
        const Eigen::MatrixXd cocc = out.coefficients.leftCols(nocc);
        out.density = 2.0 * cocc * cocc.transpose();
    };

    RhfResult result;
    diagonalize(ints.core, result);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::MatrixXd f = detail::fock_matrix(ints, result.density);
        const Eigen::MatrixXd p_old = result.density;
        diagonalize(f, result);
        const double change = (result.density - p_old).cwiseAbs().maxCoeff();
        if (change < opts.density_tolerance) {
            const Eigen::MatrixXd f_final = detail::fock_matrix(ints, result.density);
            result.energy = 0.5 * (result.density.cwiseProduct(ints.core + f_final)).sum() + ints.nuclear_repulsion;
            result.iterations = it;
            return result;
        }
    }
    throw ConvergenceError("RHF did not converge in " + std::to_string(opts.max_iterations) + " iterations");
}

} // namespace qcpmd::chem
