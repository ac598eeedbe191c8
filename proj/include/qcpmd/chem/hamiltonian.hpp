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
 * @file hamiltonian.hpp
 * MO-basis electronic Hamiltonian mapped to qubits by Jordan-Wigner, with
 * spin orbitals interleaved as (alpha0, beta0, alpha1, beta1, ...).
 */
#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/chem/geometry.hpp"
#include "qcpmd/chem/integrals.hpp"
#include "qcpmd/chem/rhf.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/model.hpp"
#include "qcpmd/operator.hpp"

namespace qcpmd::chem {

namespace detail {

/// c * X^x Z^z (Z applied first).
struct XzTerm {
    std::complex<double> coeff;
    std::uint64_t x = 0;
    std::uint64_t z = 0;
};

using XzSum = std::vector<XzTerm>;

inline XzSum multiply(const XzSum& a, const XzSum& b) {
    XzSum out;
    out.reserve(a.size() * b.size());
    for (const auto& s : a) {
        for (const auto& t : b) {
            // Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}
            const double sign = (std::popcount(s.z & t.x) % 2 == 0) ? 1.0 : -1.0;
            out.push_back({s.coeff * t.coeff * sign, s.x ^ t.x, s.z ^ t.z});
        }
    }
    return out;
}

inline XzSum jw_annihilate(std::size_t p) {
    const std::uint64_t bit = std::uint64_t{1} << p;
    const std::uint64_t low = bit - 1;
    return {{0.5, bit, low}, {-0.5, bit, low | bit}};
}

inline XzSum jw_create(std::size_t p) {
    const std::uint64_t bit = std::uint64_t{1} << p;
    const std::uint64_t low = bit - 1;
    return {{0.5, bit, low}, {0.5, bit, low | bit}};
}

} // namespace detail

/// Linear map from spatial MO integrals (h_ij, then (ij|kl)) to Pauli coefficients.
class JordanWignerTemplate {
  public:
    explicit JordanWignerTemplate(std::size_t n_spatial) : n_{n_spatial} {
        const std::size_t n_spin = 2 * n_;
        if (n_spin > PauliString::kMaxQubits) {
            throw DimensionError("too many spin orbitals for the Pauli representation");
        }
        const std::size_t n_cols = n_ * n_ + n_ * n_ * n_ * n_;
        std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<std::complex<double>>> rows;
        auto accumulate = [&](const detail::XzSum& sum, std::size_t col, double scale) {
            for (const auto& t : sum) {
                auto& row = rows[{t.x, t.z}];
                if (row.empty()) {
                    row.assign(n_cols, 0.0);
                }
                row[col] += scale * t.coeff;
            }
        };
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                for (std::size_t s = 0; s < 2; ++s) {
                    accumulate(detail::multiply(detail::jw_create(2 * i + s), detail::jw_annihilate(2 * j + s)),
                               i * n_ + j, 1.0);
                }
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                for (std::size_t k = 0; k < n_; ++k) {
                    for (std::size_t l = 0; l < n_; ++l) {
                        const std::size_t col = n_ * n_ + ((i * n_ + j) * n_ + k) * n_ + l;
                        for (std::size_t s = 0; s < 2; ++s) {
                            for (std::size_t t = 0; t < 2; ++t) {
                                const auto op = detail::multiply(
                                    detail::multiply(detail::jw_create(2 * i + s), detail::jw_create(2 * k + t)),
                                    detail::multiply(detail::jw_annihilate(2 * l + t),
                                                     detail::jw_annihilate(2 * j + s)));
                                accumulate(op, col, 0.5);
                            }
                        }
                    }
                }
            }
        }
        for (auto& [key, row] : rows) {
            // c X^x Z^z = c i^{-|x&z|} P(x, z)
            const int ny = std::popcount(key.first & key.second);
            const std::complex<double> phase = i_power((4 - ny % 4) % 4);
            Eigen::VectorXcd w(static_cast<Eigen::Index>(n_cols));
            bool any = false;
            for (std::size_t c = 0; c < n_cols; ++c) {
                w[static_cast<Eigen::Index>(c)] = row[c] * phase;
                any = any || std::abs(row[c]) > 0.0;
            }
            if (any) {
                strings_.emplace_back(n_spin, key.first, key.second);
                weights_.push_back(std::move(w));
            }
        }
    }

    [[nodiscard]] std::size_t n_spatial() const { return n_; }
    [[nodiscard]] std::size_t n_qubits() const { return 2 * n_; }

    /// Qubit operator for MO integrals; constant is added to the identity.
    [[nodiscard]] QubitOperator apply(const Eigen::MatrixXd& h_mo, const std::vector<double>& eri_mo,
                                      double constant) const {
        const std::size_t n_cols = n_ * n_ + eri_mo.size();
        Eigen::VectorXd x(static_cast<Eigen::Index>(n_cols));
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                x[static_cast<Eigen::Index>(i * n_ + j)] =
                    h_mo(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        for (std::size_t c = 0; c < eri_mo.size(); ++c) {
            x[static_cast<Eigen::Index>(n_ * n_ + c)] = eri_mo[c];
        }
        const Eigen::VectorXcd xc = x.cast<std::complex<double>>();
        std::vector<PauliTerm> terms;
        terms.reserve(strings_.size() + 1);
        double scale = 1.0;
        for (std::size_t r = 0; r < strings_.size(); ++r) {
            const std::complex<double> c = weights_[r].cwiseProduct(xc).sum();
            scale = std::max(scale, std::abs(c));
            if (std::abs(c.imag()) > 1e-10 * scale) {
                throw DomainError("Jordan-Wigner coefficient has imaginary part " + std::to_string(c.imag()));
            }
            terms.push_back({strings_[r], c.real()});
        }
        terms.push_back({PauliString(2 * n_), constant});
        return QubitOperator::from_terms(2 * n_, std::move(terms));
    }

  private:
    std::size_t n_;
    std::vector<PauliString> strings_;
    std::vector<Eigen::VectorXcd> weights_;
};

/// Transforms AO integrals to the MO basis of coefficients c.
inline std::pair<Eigen::MatrixXd, std::vector<double>> mo_integrals(const MolecularIntegrals& ints,
                                                                    const Eigen::MatrixXd& c) {
    const std::size_t n = ints.n;
    Eigen::MatrixXd h = c.transpose() * ints.core * c;
    auto idx = [n](std::size_t i, std::size_t j, std::size_t k, std::size_t l) { return ((i * n + j) * n + k) * n + l; };
    std::vector<double> a = ints.eri;
    std::vector<double> b(a.size(), 0.0);
    auto cc = [&c](std::size_t mu, std::size_t p) {
        return c(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(p));
    };
    // Four quarter transformations, one index at a time.
    for (int pass = 0; pass < 4; ++pass) {
        std::fill(b.begin(), b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    for (std::size_t l = 0; l < n; ++l) {
                        const double v = a[idx(i, j, k, l)];
                        for (std::size_t p = 0; p < n; ++p) {
                            switch (pass) {
                            case 0: b[idx(p, j, k, l)] += cc(i, p) * v; break;
                            case 1: b[idx(i, p, k, l)] += cc(j, p) * v; break;
                            case 2: b[idx(i, j, p, l)] += cc(k, p) * v; break;
                            default: b[idx(i, j, k, p)] += cc(l, p) * v; break;
                            }
                        }
                    }
                }
            }
        }
        std::swap(a, b);
    }
    return {std::move(h), std::move(a)};
}

struct ElectronicStructure {
    MolecularIntegrals integrals;
    RhfResult rhf;
    QubitOperator hamiltonian{1};
};

/// Caches the Jordan-Wigner template for a fixed element list.
class MolecularHamiltonianBuilder {
  public:
    explicit MolecularHamiltonianBuilder(const MolecularGeometry& reference)
        : reference_{reference},
          template_{std::make_shared<JordanWignerTemplate>(sto3g_basis(reference).size())} {}

    [[nodiscard]] const MolecularGeometry& reference() const { return reference_; }
    [[nodiscard]] std::size_t n_qubits() const { return template_->n_qubits(); }

    [[nodiscard]] ElectronicStructure solve(const MolecularGeometry& geom) const {
        check_compatible(geom);
        ElectronicStructure out;
        out.integrals = compute_integrals(sto3g_basis(geom), geom);
        out.rhf = run_rhf(out.integrals, static_cast<std::size_t>(geom.n_electrons()));
        const auto [h_mo, eri_mo] = mo_integrals(out.integrals, out.rhf.coefficients);
        out.hamiltonian = template_->apply(h_mo, eri_mo, out.integrals.nuclear_repulsion);
        return out;
    }

    [[nodiscard]] QubitOperator build(const MolecularGeometry& geom) const { return solve(geom).hamiltonian; }

    [[nodiscard]] QubitOperator build(std::span<const double> coordinates) const {
        return build(reference_.with_coordinates(coordinates));
    }

  private:
    void check_compatible(const MolecularGeometry& geom) const {
        bool ok = geom.size() == reference_.size() && geom.charge() == reference_.charge();
        for (std::size_t k = 0; ok && k < geom.size(); ++k) {
            ok = geom.atoms()[k].atomic_number == reference_.atoms()[k].atomic_number;
        }
        if (!ok) {
            throw DimensionError("geometry does not match the builder's element list");
        }
    }

    MolecularGeometry reference_;
    std::shared_ptr<const JordanWignerTemplate> template_;
};

inline QubitOperator build_qubit_hamiltonian(const MolecularGeometry& geom) {
    return MolecularHamiltonianBuilder(geom).build(geom);
}

/// Default central-difference step for nuclear derivatives, bohr.
inline constexpr double kNuclearFdStep = 1e-3;

namespace detail {

/// Central-difference coefficients aligned with h.terms().
inline std::vector<double> coefficient_derivative(const MolecularHamiltonianBuilder& builder, const QubitOperator& h,
                                                  std::span<const double> r, std::size_t coord, double delta) {
    std::vector<double> rp(r.begin(), r.end());
    std::vector<double> rm(r.begin(), r.end());
    rp[coord] += delta;
    rm[coord] -= delta;
    const QubitOperator hp = builder.build(rp);
    const QubitOperator hm = builder.build(rm);
    if (!hp.same_term_set(h) || !hm.same_term_set(h)) {
        throw DomainError("Pauli term set changes under a displacement of coordinate " + std::to_string(coord) +
                          "; coefficient pruning is too aggressive for finite differencing");
    }
    std::vector<double> d(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        d[i] = (hp.terms()[i].coeff - hm.terms()[i].coeff) / (2.0 * delta);
    }
    return d;
}

} // namespace detail

/// (H(R + delta e) - H(R - delta e)) / (2 delta) for coordinate 3 * atom + axis.
inline QubitOperator hamiltonian_coefficient_derivative(const MolecularGeometry& geom, std::size_t atom,
                                                        std::size_t axis, double delta = kNuclearFdStep) {
    if (atom >= geom.size() || axis >= 3) {
        throw DimensionError("coordinate (" + std::to_string(atom) + ", " + std::to_string(axis) + ") out of range");
    }
    if (!(delta > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
    const MolecularHamiltonianBuilder builder(geom);
    const auto r = geom.coordinates();
    const QubitOperator h = builder.build(r);
    const auto d = detail::coefficient_derivative(builder, h, r, 3 * atom + axis, delta);
    std::vector<PauliTerm> terms;
    for (std::size_t i = 0; i < h.size(); ++i) {
        terms.push_back({h.terms()[i].string, d[i]});
    }
    return QubitOperator::from_terms(h.n_qubits(), std::move(terms));
}

/// HamiltonianModel over the nuclear coordinates of a molecule.
class MolecularModel {
  public:
    explicit MolecularModel(const MolecularGeometry& reference, double delta = kNuclearFdStep)
        : builder_{reference}, delta_{delta} {}

    [[nodiscard]] std::size_t n_coordinates() const { return 3 * builder_.reference().size(); }
    [[nodiscard]] std::size_t n_qubits() const { return builder_.n_qubits(); }
    [[nodiscard]] const MolecularHamiltonianBuilder& builder() const { return builder_; }
    [[nodiscard]] double fd_step() const { return delta_; }

    [[nodiscard]] ModelSnapshot snapshot(std::span<const double> r) const {
        ModelSnapshot s;
        s.hamiltonian = builder_.build(r);
        const auto n_terms = static_cast<Eigen::Index>(s.hamiltonian.size());
        s.coefficient_gradient.resize(static_cast<Eigen::Index>(r.size()), n_terms);
        for (std::size_t a = 0; a < r.size(); ++a) {
            const auto d = detail::coefficient_derivative(builder_, s.hamiltonian, r, a, delta_);
            for (Eigen::Index i = 0; i < n_terms; ++i) {
                s.coefficient_gradient(static_cast<Eigen::Index>(a), i) = d[static_cast<std::size_t>(i)];
            }
        }
        return s;
    }

  private:
    MolecularHamiltonianBuilder builder_;
    double delta_;
};

static_assert(HamiltonianModel<MolecularModel>);

} // namespace qcpmd::chem
