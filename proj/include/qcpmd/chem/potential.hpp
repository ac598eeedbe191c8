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
 * @file potential.hpp
 * Diatomic potential curves (RHF and FCI) and the FCI harmonic reference
 * frequency at the curve minimum.
 */
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/chem/geometry.hpp"
#include "qcpmd/chem/hamiltonian.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/operator.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::chem {

/// Places the second atom of a diatomic at `bond` (bohr) from the first along the reference axis.
inline MolecularGeometry with_bond_length(const MolecularGeometry& reference, double bond) {
    if (reference.size() != 2) {
        throw DimensionError("bond-length geometry needs a diatomic");
    }
    if (!(bond > 0.0)) {
        throw DomainError("bond length must be positive");
    }
    auto r = reference.coordinates();
    const Eigen::Map<const Eigen::Vector3d> a(r.data());
    const Eigen::Map<const Eigen::Vector3d> b(r.data() + 3);
    const Eigen::Vector3d axis = (b - a).normalized();
    const Eigen::Vector3d moved = a + bond * axis;
    r[3] = moved[0];
    r[4] = moved[1];
    r[5] = moved[2];
    return reference.with_coordinates(r);
}

inline double reduced_mass(const MolecularGeometry& diatomic) {
    if (diatomic.size() != 2) {
        throw DimensionError("reduced mass needs a diatomic");
    }
    const double ma = diatomic.atoms()[0].mass;
    const double mb = diatomic.atoms()[1].mass;
    return ma * mb / (ma + mb);
}

struct CurvePoint {
    double bond = 0.0; // bohr
    double e_rhf = 0.0;
    double e_fci = 0.0;
    bool ok = false;
    std::string error;
};

/// Ground-state energy of the qubit Hamiltonian in the full Fock space.
inline double fci_energy(const MolecularHamiltonianBuilder& builder, const MolecularGeometry& geom) {
    return min_eigenpair(builder.build(geom)).value;
}

/// One row per grid point; SCF failures are recorded on the row instead of thrown.
inline std::vector<CurvePoint> scan_bond(const MolecularGeometry& reference, std::span<const double> bonds) {
    for (std::size_t i = 1; i < bonds.size(); ++i) {
        if (!(bonds[i] > bonds[i - 1])) {
            throw ConfigError("bond grid must be strictly increasing");
        }
    }
    const MolecularHamiltonianBuilder builder(reference);
    std::vector<CurvePoint> out;
    for (double r : bonds) {
        CurvePoint p;
        p.bond = r;
        try {
            const auto es = builder.solve(with_bond_length(reference, r));
            p.e_rhf = es.rhf.energy;
            p.e_fci = min_eigenpair(es.hamiltonian).value;
            p.ok = true;
        } catch (const Error& e) {
            p.error = e.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

struct HarmonicReference {
    double bond = 0.0;       // bohr, FCI minimum
    double energy = 0.0;     // FCI energy at the minimum
    double curvature = 0.0;  // hartree / bohr^2
    double reduced_mass = 0.0;
    double omega = 0.0;      // atomic angular frequency
    double wavenumber = 0.0; // cm^-1
};

/**
 * Golden-section minimum of the FCI curve inside [lo, hi], then the central
 * second difference with step h for the curvature.
 */
inline HarmonicReference fci_harmonic_reference(const MolecularGeometry& reference, double lo, double hi,
                                                double h = 1e-3, double tolerance = 1e-7) {
    if (!(lo < hi)) {
        throw DomainError("empty bracket for the FCI minimum");
    }
    const MolecularHamiltonianBuilder builder(reference);
    const auto e = [&](double r) { return fci_energy(builder, with_bond_length(reference, r)); };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo;
    double b = hi;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = e(c);
    double fd = e(d);
    while (b - a > tolerance) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = e(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = e(d);
        }
    }
    HarmonicReference out;
    out.bond = 0.5 * (a + b);
    if (out.bond - lo < 10.0 * tolerance || hi - out.bond < 10.0 * tolerance) {
        throw ConvergenceError("FCI minimum lies on the bracket edge");
    }
    out.energy = e(out.bond);
    out.curvature = (e(out.bond + h) - 2.0 * out.energy + e(out.bond - h)) / (h * h);
    if (!(out.curvature > 0.0)) {
        throw DomainError("FCI curvature at the minimum is not positive");
    }
    out.reduced_mass = reduced_mass(reference);
    out.omega = std::sqrt(out.curvature / out.reduced_mass);
    out.wavenumber = units::angular_to_wavenumber(out.omega);
    return out;
}

} // namespace qcpmd::chem
