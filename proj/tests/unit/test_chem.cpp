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
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcpmd/chem/hamiltonian.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/qsim.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::chem {
namespace {

MolecularGeometry h2(double bond_bohr) { return MolecularGeometry::diatomic("H", "H", bond_bohr); }

TEST(Geometry, DerivedElectronCountAndValidation) {
    const auto g = h2(1.4);
    EXPECT_EQ(g.n_electrons(), 2);
    EXPECT_NEAR(units::me_to_amu(g.atoms()[0].mass), 1.00794, 1e-12);
    EXPECT_THROW(MolecularGeometry({Atom::of("H", {0, 0, 0})}, 0), ConfigError);
    EXPECT_THROW(MolecularGeometry({Atom{1, -1.0, {0, 0, 0}}, Atom::of("H", {0, 0, 1})}, 0), ConfigError);
}

TEST(Geometry, JsonInputUsesAngstromAndOptionalMass) {
    const auto j = nlohmann::json::parse(R"({"atoms":[{"element":"H","xyz_angstrom":[0,0,0]},
        {"element":"H","mass_amu":2.014,"xyz_angstrom":[0,0,0.735]}],"charge":0})");
    const auto g = MolecularGeometry::from_json(j);
    EXPECT_NEAR(distance(g.atoms()[0].position, g.atoms()[1].position), 0.735 / units::kAngstromPerBohr, 1e-12);
    EXPECT_NEAR(units::me_to_amu(g.atoms()[1].mass), 2.014, 1e-12);
    auto bad = j;
    bad["atoms"][0]["colour"] = "red";
    EXPECT_THROW(MolecularGeometry::from_json(bad), ConfigError);
}

TEST(Basis, HydrogenSto3gParameters) {
    const auto basis = sto3g_basis(h2(1.4));
    ASSERT_EQ(basis.size(), 2U);
    ASSERT_EQ(basis[0].primitives.size(), 3U);
    const double expected_exponents[] = {3.42525091, 0.62391373, 0.16885540};
    const double contraction[] = {0.15432897, 0.53532814, 0.44463454};
    double ratio0 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& p = basis[0].primitives[k];
        EXPECT_DOUBLE_EQ(p.exponent, expected_exponents[k]);
        // Stored coefficient = d_k * N_k * overall scale; the scale is common to all k.
        const double ratio = p.coefficient / (contraction[k] * std::pow(2.0 * p.exponent / std::numbers::pi, 0.75));
        if (k == 0) {
            ratio0 = ratio;
        }
        EXPECT_NEAR(ratio / ratio0, 1.0, 1e-14);
    }
    EXPECT_NEAR(ratio0, 1.0, 1e-6);
    for (const auto& g : basis) {
        EXPECT_NEAR(overlap_integral(g, g), 1.0, 1e-10);
    }
}

TEST(Basis, HeliumAcceptedLithiumRejected) {
    const MolecularGeometry he({Atom::of("He", {0, 0, 0})}, 0);
    const auto basis = sto3g_basis(he);
    ASSERT_EQ(basis.size(), 1U);
    EXPECT_DOUBLE_EQ(basis[0].primitives[0].exponent, 6.36242139);
    EXPECT_NEAR(overlap_integral(basis[0], basis[0]), 1.0, 1e-10);
    const MolecularGeometry li({Atom::of("Li", {0, 0, 0}), Atom::of("H", {0, 0, 3})}, 0);
    EXPECT_THROW(sto3g_basis(li), ConfigError);
}

TEST(Integrals, BoysFunctionLimits) {
    EXPECT_DOUBLE_EQ(boys_f0(0.0), 1.0);
    EXPECT_NEAR(boys_f0(1e-10), 1.0, 1e-10);
    EXPECT_NEAR(boys_f0(1e-7), 1.0 - 1e-7 / 3.0, 1e-14);
    // Large-t asymptote sqrt(pi/t)/2.
    EXPECT_NEAR(boys_f0(50.0), 0.5 * std::sqrt(std::numbers::pi / 50.0), 1e-14);
    // F0(1) = sqrt(pi)/2 erf(1).
    EXPECT_NEAR(boys_f0(1.0), 0.746824132812427, 1e-14);
}

TEST(Integrals, MatchQuadratureOracle) {
    const auto geom = h2(1.4);
    const auto basis = sto3g_basis(geom);
    const auto ints = compute_integrals(basis, geom);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            EXPECT_NEAR(ints.overlap(a, b), oracle::overlap(basis[i], basis[j]), 1e-7);
            EXPECT_NEAR(ints.kinetic(a, b), oracle::kinetic(basis[i], basis[j]), 1e-7);
            double v = 0.0;
            for (const auto& atom : geom.atoms()) {
                v += oracle::nuclear(basis[i], basis[j], atom.position, atom.atomic_number);
            }
            EXPECT_NEAR(ints.nuclear(a, b), v, 1e-7);
        }
    }
    EXPECT_NEAR(ints.eri_at(0, 0, 0, 0), oracle::eri(basis[0], basis[0], basis[0], basis[0]), 1e-7);
    EXPECT_NEAR(ints.eri_at(0, 0, 1, 1), oracle::eri(basis[0], basis[0], basis[1], basis[1]), 1e-7);
    EXPECT_NEAR(ints.eri_at(0, 1, 0, 1), oracle::eri(basis[0], basis[1], basis[0], basis[1]), 1e-7);
    EXPECT_NEAR(ints.eri_at(0, 0, 0, 1), oracle::eri(basis[0], basis[0], basis[0], basis[1]), 1e-7);
    EXPECT_NEAR(ints.nuclear_repulsion, 1.0 / 1.4, 1e-15);
}

TEST(Integrals, EightFoldSymmetryAndPositiveOverlap) {
    const MolecularGeometry heh({Atom::of("He", {0, 0, 0}), Atom::of("H", {0.1, 0.2, 1.46})}, 1);
    const auto ints = compute_integrals(sto3g_basis(heh), heh);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) {
                    const double g = ints.eri_at(i, j, k, l);
                    EXPECT_EQ(g, ints.eri_at(j, i, k, l));
                    EXPECT_EQ(g, ints.eri_at(i, j, l, k));
                    EXPECT_EQ(g, ints.eri_at(k, l, i, j));
                    EXPECT_EQ(g, ints.eri_at(l, k, j, i));
                }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ints.overlap);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_TRUE(ints.overlap.isApprox(ints.overlap.transpose()));
}

TEST(Integrals, CoincidentNucleiRejected) {
    const auto geom = h2(1e-9);
    EXPECT_THROW(compute_integrals(sto3g_basis(geom), geom), DomainError);
}

TEST(Rhf, MatchesClosedFormSymmetricSolution) {
    const auto geom = h2(1.4);
    const auto basis = sto3g_basis(geom);
    const auto ints = compute_integrals(basis, geom);
    const auto rhf = run_rhf(ints, 2);
    // Oracle built on quadrature integrals, not the analytic engine.
    const double s12 = oracle::overlap(basis[0], basis[1]);
    auto hcore = [&](std::size_t i, std::size_t j) {
        double v = oracle::kinetic(basis[i], basis[j]);
        for (const auto& atom : geom.atoms()) {
            v += oracle::nuclear(basis[i], basis[j], atom.position, atom.atomic_number);
        }
        return v;
    };
    const auto ref = oracle::symmetric_diatomic(
        s12, hcore(0, 0), hcore(0, 1), oracle::eri(basis[0], basis[0], basis[0], basis[0]),
        oracle::eri(basis[0], basis[0], basis[1], basis[1]), oracle::eri(basis[0], basis[1], basis[0], basis[1]),
        oracle::eri(basis[0], basis[0], basis[0], basis[1]), 1.0 / 1.4);
    EXPECT_NEAR(rhf.energy, ref.e_rhf, 1e-6);
    EXPECT_NEAR(rhf.energy, -1.1167, 1e-4);
    const Eigen::MatrixXd ortho = rhf.coefficients.transpose() * ints.overlap * rhf.coefficients;
    EXPECT_TRUE(ortho.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-8));
    for (Eigen::Index k = 0; k < 2; ++k) {
        EXPECT_NEAR(std::abs(rhf.coefficients(0, k)), std::abs(rhf.coefficients(1, k)), 1e-8);
    }
}

TEST(Rhf, RejectsOddElectronCountAndOverfullBasis) {
    const auto geom = h2(1.4);
    const auto ints = compute_integrals(sto3g_basis(geom), geom);
    EXPECT_THROW(run_rhf(ints, 3), DomainError);
    EXPECT_THROW(run_rhf(ints, 6), DomainError);
}

TEST(Rhf, NonConvergenceReported) {
    const auto geom = h2(1.4);
    const auto ints = compute_integrals(sto3g_basis(geom), geom);
    EXPECT_THROW(run_rhf(ints, 2, RhfOptions{1, 1e-30}), ConvergenceError);
}

TEST(QubitHamiltonian, H2HasFifteenTermsOnFourQubits) {
    const auto h = build_qubit_hamiltonian(h2(1.4));
    EXPECT_EQ(h.n_qubits(), 4U);
    EXPECT_EQ(h.size(), 15U);
    EXPECT_EQ(h.non_identity_count(), 14U);
}

TEST(QubitHamiltonian, GroundStateMatchesTwoConfigurationOracle) {
    for (double r : {0.8, 1.4, 2.5}) {
        const auto geom = h2(r);
        const auto basis = sto3g_basis(geom);
        const auto ints = compute_integrals(basis, geom);
        const auto ref = oracle::symmetric_diatomic(ints.overlap(0, 1), ints.core(0, 0), ints.core(0, 1),
                                                    ints.eri_at(0, 0, 0, 0), ints.eri_at(0, 0, 1, 1),
                                                    ints.eri_at(0, 1, 0, 1), ints.eri_at(0, 0, 0, 1),
                                                    ints.nuclear_repulsion);
        const auto h = build_qubit_hamiltonian(geom);
        const auto fci = min_eigenpair(h);
        EXPECT_NEAR(fci.value, ref.e_fci, 1e-10) << r;
        // Hartree-Fock determinant |0011> reproduces E_RHF.
        EXPECT_NEAR(exact_expectation(h, StateVector::basis(4, 0b0011)), ref.e_rhf, 1e-10) << r;
        EXPECT_LE(fci.value, ref.e_rhf);
    }
    EXPECT_NEAR(min_eigenpair(build_qubit_hamiltonian(h2(1.4))).value, -1.1373, 1e-4);
}

TEST(QubitHamiltonian, CommutesWithParticleNumber) {
    const auto h = dense_matrix(build_qubit_hamiltonian(h2(1.3)));
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(16, 16);
    for (int i = 0; i < 16; ++i) {
        n(i, i) = std::popcount(static_cast<unsigned>(i));
    }
    EXPECT_LT((h * n - n * h).norm(), 1e-12);
    EXPECT_LT((h - h.adjoint()).norm(), 1e-14);
}

TEST(QubitHamiltonian, IdentityCoefficientSettlesAsNuclearRepulsionVanishes) {
    // Beyond ~8 bohr the sigma_g / sigma_u pair is degenerate to machine
    // precision and RHF is ill-posed, so the asymptote is probed at 5-8 bohr.
    const PauliString id(4);
    double previous = 0.0;
    double previous_step = 1.0;
    for (double r : {5.0, 6.0, 7.0, 8.0}) {
        const auto s = MolecularHamiltonianBuilder(h2(r)).solve(h2(r));
        EXPECT_NEAR(s.integrals.nuclear_repulsion, 1.0 / r, 1e-15);
        const double c = s.hamiltonian.coefficient(id);
        if (r > 5.0) {
            const double step = std::abs(c - previous);
            EXPECT_LT(step, previous_step);
            previous_step = step;
        }
        previous = c;
    }
    EXPECT_LT(previous_step, 1e-3);
}

TEST(QubitHamiltonian, FciCurveMinimumNearExperimentalBond) {
    double best_r = 0.0;
    double best_e = 1e9;
    for (double r_ang = 0.70; r_ang <= 0.77 + 1e-12; r_ang += 0.005) {
        const double e = min_eigenpair(build_qubit_hamiltonian(h2(units::angstrom_to_bohr(r_ang)))).value;
        if (e < best_e) {
            best_e = e;
            best_r = r_ang;
        }
    }
    EXPECT_NEAR(best_r, 0.735, 0.005);
}

TEST(CoefficientDerivative, NewtonThirdLawOnSymmetricStates) {
    const auto geom = h2(1.4);
    const auto d1 = hamiltonian_coefficient_derivative(geom, 0, 2);
    const auto d2 = hamiltonian_coefficient_derivative(geom, 1, 2);
    const auto fci = to_state(min_eigenpair(build_qubit_hamiltonian(geom)).vector);
    EXPECT_NEAR(exact_expectation(d1, fci), -exact_expectation(d2, fci), 1e-9);
    const auto hf = StateVector::basis(4, 0b0011);
    EXPECT_NEAR(exact_expectation(d1, hf), -exact_expectation(d2, hf), 1e-9);
}

TEST(CoefficientDerivative, TermsAreSubsetOfHamiltonian) {
    const auto geom = h2(1.4);
    const auto h = build_qubit_hamiltonian(geom);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t ax = 0; ax < 3; ++ax) {
            const auto d = hamiltonian_coefficient_derivative(geom, a, ax);
            for (const auto& t : d.terms()) {
                EXPECT_TRUE(h.contains(t.string)) << t.string.to_string() << " " << t.coeff;
            }
        }
    }
}

TEST(CoefficientDerivative, StepHalvingChangesByDeltaSquared) {
    const auto geom = h2(1.4);
    const auto d1 = hamiltonian_coefficient_derivative(geom, 1, 2, 2e-3);
    const auto d2 = hamiltonian_coefficient_derivative(geom, 1, 2, 1e-3);
    const auto d3 = hamiltonian_coefficient_derivative(geom, 1, 2, 5e-4);
    ASSERT_TRUE(d1.same_term_set(d2));
    for (std::size_t i = 0; i < d1.size(); ++i) {
        const double e12 = std::abs(d1.terms()[i].coeff - d2.terms()[i].coeff);
        const double e23 = std::abs(d2.terms()[i].coeff - d3.terms()[i].coeff);
        // O(delta^2) error: successive differences shrink by ~4.
        if (e12 > 1e-9) {
            EXPECT_NEAR(e12 / e23, 4.0, 0.5) << d1.terms()[i].string.to_string();
        }
    }
}

TEST(CoefficientDerivative, FciForceVanishesAtEquilibrium) {
    // Locate the FCI minimum by golden-section search, then check the force.
    auto e = [](double r) { return min_eigenpair(build_qubit_hamiltonian(h2(r))).value; };
    double a = 1.3;
    double b = 1.5;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        (e(c) < e(d) ? b : a) = (e(c) < e(d) ? d : c);
    }
    const auto geom = h2(0.5 * (a + b));
    const auto fci = to_state(min_eigenpair(build_qubit_hamiltonian(geom)).vector);
    EXPECT_LT(std::abs(exact_expectation(hamiltonian_coefficient_derivative(geom, 1, 2), fci)), 1e-4);
}

TEST(CoefficientDerivative, ModelSnapshotRowsMatchPerCoordinateOperators) {
    const auto geom = h2(1.4);
    const MolecularModel model(geom);
    const auto snap = model.snapshot(geom.coordinates());
    for (std::size_t c = 0; c < 6; ++c) {
        const auto d = hamiltonian_coefficient_derivative(geom, c / 3, c % 3);
        for (std::size_t i = 0; i < snap.hamiltonian.size(); ++i) {
            EXPECT_NEAR(snap.coefficient_gradient(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)),
                        d.coefficient(snap.hamiltonian.terms()[i].string), 1e-12);
        }
    }
}

} // namespace
} // namespace qcpmd::chem
