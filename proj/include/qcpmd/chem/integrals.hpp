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
 * @file integrals.hpp
 * STO-3G s-type basis and closed-form Gaussian integrals (overlap, kinetic,
 * nuclear attraction, electron repulsion) via the Gaussian product theorem
 * and the zeroth-order Boys function.
 */
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/chem/geometry.hpp"
#include "qcpmd/errors.hpp"

namespace qcpmd::chem {

struct Primitive {
    double exponent = 0.0;
    /// Contraction coefficient times primitive normalization.
    double coefficient = 0.0;
};

struct ContractedGaussian {
    Vec3 center{};
    std::vector<Primitive> primitives;
};

namespace detail {

struct Sto3gShell {
    std::array<double, 3> exponents;
};

// Standard STO-3G 1s exponents; the contraction coefficients are shared.
inline constexpr std::array<double, 3> kSto3gCoefficients{0.15432897, 0.53532814, 0.44463454};
inline constexpr Sto3gShell kSto3gHydrogen{{3.42525091, 0.62391373, 0.16885540}};
inline constexpr Sto3gShell kSto3gHelium{{6.36242139, 1.15892300, 0.31364979}};

inline double primitive_overlap_same_center(double a, double b) {
    return std::pow(std::numbers::pi / (a + b), 1.5);
}

} // namespace detail

/// Normalizes a contraction given raw (exponent, contraction coefficient) pairs.
inline ContractedGaussian make_contracted(const Vec3& center, std::span<const double> exponents,
                                          std::span<const double> contraction) {
    ContractedGaussian g;
    g.center = center;
    for (std::size_t k = 0; k < exponents.size(); ++k) {
        const double norm = std::pow(2.0 * exponents[k] / std::numbers::pi, 0.75);
        g.primitives.push_back({exponents[k], contraction[k] * norm});
    }
    double self = 0.0;
    for (const auto& p : g.primitives) {
        for (const auto& q : g.primitives) {
            self += p.coefficient * q.coefficient * detail::primitive_overlap_same_center(p.exponent, q.exponent);
        }
    }
    const double scale = 1.0 / std::sqrt(self);
    for (auto& p : g.primitives) {
        p.coefficient *= scale;
    }
    return g;
}

/// One normalized 1s contraction per atom (H and He only).
inline std::vector<ContractedGaussian> sto3g_basis(const MolecularGeometry& geom) {
    std::vector<ContractedGaussian> basis;
    for (const auto& atom : geom.atoms()) {
        const detail::Sto3gShell* shell = nullptr;
        if (atom.atomic_number == 1) {
            shell = &detail::kSto3gHydrogen;
        } else if (atom.atomic_number == 2) {
            shell = &detail::kSto3gHelium;
        } else {
            throw ConfigError("unsupported element " + std::string(element(atom.atomic_number).symbol) +
                              ": only s-orbital elements (H, He) are available");
        }
        basis.push_back(make_contracted(atom.position, shell->exponents, detail::kSto3gCoefficients));
    }
    return basis;
}

/// F_0(t) = integral_0^1 exp(-t u^2) du.
inline double boys_f0(double t) {
    if (t < 1e-8) {
        return 1.0 - t / 3.0;
    }
    const double st = std::sqrt(t);
    return 0.5 * std::sqrt(std::numbers::pi / t) * std::erf(st);
}

struct MolecularIntegrals {
    Eigen::MatrixXd overlap;
    Eigen::MatrixXd kinetic;
    Eigen::MatrixXd nuclear;
    Eigen::MatrixXd core; // kinetic + nuclear
    /// (ij|kl) in chemists' notation, flattened as ((i*n + j)*n + k)*n + l.
    std::vector<double> eri;
    double nuclear_repulsion = 0.0;
    std::size_t n = 0;

    [[nodiscard]] double eri_at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return eri[((i * n + j) * n + k) * n + l];
    }
};

namespace detail {

inline double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

inline Vec3 product_center(double a, const Vec3& A, double b, const Vec3& B) {
    const double p = a + b;
    return {(a * A[0] + b * B[0]) / p, (a * A[1] + b * B[1]) / p, (a * A[2] + b * B[2]) / p};
}

} // namespace detail

inline double overlap_integral(const ContractedGaussian& ga, const ContractedGaussian& gb) {
    const double ab2 = detail::dist2(ga.center, gb.center);
    double s = 0.0;
    for (const auto& pa : ga.primitives) {
        for (const auto& pb : gb.primitives) {
            const double p = pa.exponent + pb.exponent;
            const double mu = pa.exponent * pb.exponent / p;
            s += pa.coefficient * pb.coefficient * std::pow(std::numbers::pi / p, 1.5) * std::exp(-mu * ab2);
        }
    }
    return s;
}

inline double kinetic_integral(const ContractedGaussian& ga, const ContractedGaussian& gb) {
    const double ab2 = detail::dist2(ga.center, gb.center);
    double t = 0.0;
    for (const auto& pa : ga.primitives) {
        for (const auto& pb : gb.primitives) {
            const double p = pa.exponent + pb.exponent;
            const double mu = pa.exponent * pb.exponent / p;
            const double s = std::pow(std::numbers::pi / p, 1.5) * std::exp(-mu * ab2);
            t += pa.coefficient * pb.coefficient * mu * (3.0 - 2.0 * mu * ab2) * s;
        }
    }
    return t;
}

/// <a| -Z / |r - C| |b>.
inline double nuclear_attraction_integral(const ContractedGaussian& ga, const ContractedGaussian& gb, const Vec3& c,
                                          double charge) {
    const double ab2 = detail::dist2(ga.center, gb.center);
    double v = 0.0;
    for (const auto& pa : ga.primitives) {
        for (const auto& pb : gb.primitives) {
            const double p = pa.exponent + pb.exponent;
            const double mu = pa.exponent * pb.exponent / p;
            const Vec3 P = detail::product_center(pa.exponent, ga.center, pb.exponent, gb.center);
            v += pa.coefficient * pb.coefficient * (-charge) * 2.0 * std::numbers::pi / p * std::exp(-mu * ab2) *
                 boys_f0(p * detail::dist2(P, c));
        }
    }
    return v;
}

inline double electron_repulsion_integral(const ContractedGaussian& ga, const ContractedGaussian& gb,
                                          const ContractedGaussian& gc, const ContractedGaussian& gd) {
    const double ab2 = detail::dist2(ga.center, gb.center);
    const double cd2 = detail::dist2(gc.center, gd.center);
    const double prefactor = 2.0 * std::pow(std::numbers::pi, 2.5);
    double g = 0.0;
    for (const auto& pa : ga.primitives) {
        for (const auto& pb : gb.primitives) {
            const double p = pa.exponent + pb.exponent;
            const double kab = std::exp(-pa.exponent * pb.exponent / p * ab2);
            const Vec3 P = detail::product_center(pa.exponent, ga.center, pb.exponent, gb.center);
            for (const auto& pc : gc.primitives) {
                for (const auto& pd : gd.primitives) {
                    const double q = pc.exponent + pd.exponent;
                    const double kcd = std::exp(-pc.exponent * pd.exponent / q * cd2);
                    const Vec3 Q = detail::product_center(pc.exponent, gc.center, pd.exponent, gd.center);
                    const double coeff = pa.coefficient * pb.coefficient * pc.coefficient * pd.coefficient;
                    g += coeff * prefactor / (p * q * std::sqrt(p + q)) * kab * kcd *
                         boys_f0(p * q / (p + q) * detail::dist2(P, Q));
                }
            }
        }
    }
    return g;
}

/// Minimum internuclear separation accepted by compute_integrals.
inline constexpr double kCoincidentNuclei = 1e-8;

inline double nuclear_repulsion_energy(const MolecularGeometry& geom) {
    double e = 0.0;
    const auto& atoms = geom.atoms();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        for (std::size_t l = k + 1; l < atoms.size(); ++l) {
            const double r = distance(atoms[k].position, atoms[l].position);
            if (r < kCoincidentNuclei) {
                throw DomainError("nuclei " + std::to_string(k) + " and " + std::to_string(l) + " coincide");
            }
            e += atoms[k].atomic_number * atoms[l].atomic_number / r;
        }
    }
    return e;
}

inline MolecularIntegrals compute_integrals(const std::vector<ContractedGaussian>& basis,
                                            const MolecularGeometry& geom) {
    MolecularIntegrals ints;
    const std::size_t n = basis.size();
    const auto ni = static_cast<Eigen::Index>(n);
    ints.n = n;
    ints.nuclear_repulsion = nuclear_repulsion_energy(geom);
    ints.overlap.resize(ni, ni);
    ints.kinetic.resize(ni, ni);
    ints.nuclear.resize(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            ints.overlap(a, b) = ints.overlap(b, a) = overlap_integral(basis[i], basis[j]);
            ints.kinetic(a, b) = ints.kinetic(b, a) = kinetic_integral(basis[i], basis[j]);
            double v = 0.0;
            for (const auto& atom : geom.atoms()) {
                v += nuclear_attraction_integral(basis[i], basis[j], atom.position, atom.atomic_number);
            }
            ints.nuclear(a, b) = ints.nuclear(b, a) = v;
        }
    }
    ints.core = ints.kinetic + ints.nuclear;

    ints.eri.assign(n * n * n * n, 0.0);
    auto at = [n](std::size_t i, std::size_t j, std::size_t k, std::size_t l) { return ((i * n + j) * n + k) * n + l; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const std::size_t ij = i * (i + 1) / 2 + j;
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t l = 0; l <= k; ++l) {
                    const std::size_t kl = k * (k + 1) / 2 + l;
                    if (kl > ij) {
                        continue;
                    }
                    const double g = electron_repulsion_integral(basis[i], basis[j], basis[k], basis[l]);
                    for (auto idx : {at(i, j, k, l), at(j, i, k, l), at(i, j, l, k), at(j, i, l, k), at(k, l, i, j),
                                     at(l, k, i, j), at(k, l, j, i), at(l, k, j, i)}) {
                        ints.eri[idx] = g;
                    }
                }
            }
        }
    }
    return ints;
}

} // namespace qcpmd::chem
