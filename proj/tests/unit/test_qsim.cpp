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
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qcpmd/errors.hpp"
#include "qcpmd/operator.hpp"
#include "qcpmd/qsim.hpp"

namespace qcpmd {
namespace {

std::vector<double> random_params(std::size_t m, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    std::vector<double> p(m);
    for (auto& x : p) {
        x = u(gen);
    }
    return p;
}

StateVector random_state(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> g;
    std::vector<Complex> amps(std::size_t{1} << n);
    for (auto& a : amps) {
        a = {g(gen), g(gen)};
    }
    return StateVector::normalized(std::move(amps));
}

QubitOperator random_hamiltonian(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> axis(0, 3);
    std::vector<PauliTerm> terms;
    for (int t = 0; t < 12; ++t) {
        PauliString p(n);
        for (std::size_t q = 0; q < n; ++q) {
            p.set(q, static_cast<PauliAxis>(axis(gen)));
        }
        if (p.is_real()) {
            terms.push_back({p, g(gen)});
        }
    }
    return QubitOperator::from_terms(n, std::move(terms));
}

double energy(const QubitOperator& h, const AnsatzCircuit& c, std::span<const double> theta) {
    return exact_expectation(h, prepare_ansatz(c, theta));
}

// Exchange gate applied literally: [[c, s], [s, -c]] on (e_q, e_{q+1}), identity elsewhere.
std::vector<Complex> exchange_by_hand(std::vector<Complex> amps, std::size_t q, double theta) {
    const std::uint64_t lo = std::uint64_t{1} << q;
    const std::uint64_t hi = lo << 1;
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & lo) != 0 && (i & hi) == 0) {
            const std::uint64_t j = (i ^ lo) | hi;
            const Complex a = amps[i];
            const Complex b = amps[j];
            amps[i] = std::cos(theta) * a + std::sin(theta) * b;
            amps[j] = std::sin(theta) * a - std::cos(theta) * b;
        }
    }
    return amps;
}

TEST(Ansatz, BrickLayoutForFourQubitsDepthFour) {
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    EXPECT_EQ(c.n_parameters(), 12U);
    const std::vector<std::size_t> layer{0, 1, 2};
    for (std::size_t k = 0; k < 12; ++k) {
        EXPECT_EQ(c.gates()[k], layer[k % 3]);
    }
    EXPECT_EQ(AnsatzCircuit::lowest_occupation(2), 0b0011U);
}

TEST(Ansatz, ZeroParametersGiveReference) {
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    const auto psi = prepare_ansatz(c, std::vector<double>(12, 0.0));
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_EQ(psi[i], Complex(i == 3 ? 1.0 : 0.0, 0.0));
    }
}

TEST(Ansatz, ParameterCountMismatchThrows) {
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    EXPECT_THROW(prepare_ansatz(c, std::vector<double>(11, 0.0)), DimensionError);
}

TEST(Ansatz, QuarterTurnMovesExcitationUpOneQubit) {
    const AnsatzCircuit c(2, {0}, 0b01, 1);
    const std::vector<double> theta{std::numbers::pi / 2.0};
    const auto psi = prepare_ansatz(c, theta);
    EXPECT_NEAR(std::abs(psi[0b10]), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(psi[0b01]), 0.0, 1e-14);
}

TEST(Ansatz, CompiledGateEqualsExchangeMatrixOnEveryBasisState) {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = random_params(1, gen)[0];
        for (std::uint64_t ref = 0; ref < 8; ++ref) {
            const AnsatzCircuit cr(3, {1}, ref, 1);
            const auto psi = prepare_ansatz(cr, std::vector<double>{theta});
            std::vector<Complex> start(8, 0.0);
            start[ref] = 1.0;
            const auto expected = exchange_by_hand(start, 1, theta);
            for (std::size_t i = 0; i < 8; ++i) {
                EXPECT_NEAR(std::abs(psi[i] - expected[i]), 0.0, 1e-14);
            }
        }
    }
}

TEST(Ansatz, PreservesHammingWeightAndNorm) {
    std::mt19937_64 gen(4);
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    for (int trial = 0; trial < 50; ++trial) {
        const auto psi = prepare_ansatz(c, random_params(12, gen));
        EXPECT_NEAR(psi.norm_squared(), 1.0, 1e-12);
        for (std::uint64_t i = 0; i < 16; ++i) {
            if (std::popcount(i) != 2) {
                EXPECT_EQ(std::abs(psi[i]), 0.0);
            }
        }
        EXPECT_NEAR(particle_number(psi), 2.0, 1e-12);
    }
}

TEST(Ansatz, LayoutMetadataListsGatePairs) {
    const auto j = AnsatzCircuit::brick(4, 4, 0b0011).to_json();
    EXPECT_EQ(j.at("n_parameters").get<int>(), 12);
    EXPECT_EQ(j.at("depth").get<int>(), 4);
}

TEST(ShiftedCircuits, ShiftsOneCompiledAngleByQuarterTurn) {
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    std::vector<double> theta(12, 0.0);
    theta[0] = 0.1;
    const auto s = shifted_circuits(c, theta, 0);
    EXPECT_NEAR(s[0].angles.xy[0], -0.1 + std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(s[1].angles.xy[0], -0.1 - std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(s[2].angles.yx[0], 0.1 + std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(s[3].angles.yx[0], 0.1 - std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(s[2].angles.yx[0], 1.6707963267948966, 1e-12);
    EXPECT_NEAR(s[3].angles.yx[0], -1.4707963267948966, 1e-12);
    EXPECT_DOUBLE_EQ(s[0].weight, -0.5);
    EXPECT_DOUBLE_EQ(s[3].weight, -0.5);
    for (std::size_t k = 1; k < 12; ++k) {
        EXPECT_EQ(s[0].angles.xy[k], 0.0);
        EXPECT_EQ(s[0].angles.yx[k], 0.0);
    }
}

TEST(ShiftedCircuits, IndexOutOfRangeThrows) {
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    EXPECT_THROW(shifted_circuits(c, std::vector<double>(12, 0.0), 12), DimensionError);
}

TEST(ShiftedCircuits, GradientMatchesCentralDifference) {
    std::mt19937_64 gen(8);
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = random_hamiltonian(4, gen);
        const auto theta = random_params(12, gen);
        for (std::size_t k = 0; k < 12; ++k) {
            double shift = 0.0;
            for (const auto& sc : shifted_circuits(c, theta, k)) {
                shift += sc.weight * exact_expectation(h, prepare_compiled(c, sc.angles));
            }
            auto tp = theta;
            auto tm = theta;
            tp[k] += 1e-5;
            tm[k] -= 1e-5;
            const double fd = (energy(h, c, tp) - energy(h, c, tm)) / 2e-5;
            EXPECT_NEAR(shift, fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

// A single +-pi/2 pair on theta itself is not an exact derivative for the
// exchange gate; this pins down why four shifted circuits are used.
TEST(ShiftedCircuits, TwoTermRuleOnThetaIsNotExact) {
    std::mt19937_64 gen(12);
    const auto c = AnsatzCircuit::brick(4, 4, 0b0011);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = random_hamiltonian(4, gen);
        const auto theta = random_params(12, gen);
        for (std::size_t k = 0; k < 12; ++k) {
            auto tp = theta;
            auto tm = theta;
            tp[k] += std::numbers::pi / 2.0;
            tm[k] -= std::numbers::pi / 2.0;
            const double two_term = 0.5 * (energy(h, c, tp) - energy(h, c, tm));
            auto fp = theta;
            auto fm = theta;
            fp[k] += 1e-5;
            fm[k] -= 1e-5;
            const double fd = (energy(h, c, fp) - energy(h, c, fm)) / 2e-5;
            worst = std::max(worst, std::abs(two_term - fd));
        }
    }
    EXPECT_GT(worst, 1e-2);
}

TEST(ExactPauli, BasicValues) {
    EXPECT_DOUBLE_EQ(exact_pauli(StateVector::basis(2, 0b10), PauliString::parse("ZZ")), -1.0);
    EXPECT_DOUBLE_EQ(exact_pauli(StateVector::basis(1, 0), PauliString::parse("Y")), 0.0);
}

TEST(SamplePauli, DeterministicOutcome) {
    CounterStream rng(derive_key(1, {2}));
    const auto s = sample_pauli(StateVector::basis(1, 0), PauliString::parse("Z"), 51, rng);
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.sample_variance, 0.0);
    EXPECT_EQ(s.shots, 51U);
}

TEST(SamplePauli, EigenstateOfX) {
    CounterStream rng(derive_key(1, {3}));
    const double r = 1.0 / std::numbers::sqrt2;
    const auto plus = StateVector::from_amplitudes({Complex{r, 0.0}, Complex{r, 0.0}});
    const auto s = sample_pauli(plus, PauliString::parse("X"), 51, rng);
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.sample_variance, 0.0);
}

TEST(SamplePauli, EigenstateOfY) {
    CounterStream rng(derive_key(1, {4}));
    const double r = 1.0 / std::numbers::sqrt2;
    const auto plus_i = StateVector::from_amplitudes({Complex{r, 0.0}, Complex{0.0, r}});
    EXPECT_EQ(sample_pauli(plus_i, PauliString::parse("Y"), 100, rng).mean, 1.0);
    const auto minus_i = StateVector::from_amplitudes({Complex{r, 0.0}, Complex{0.0, -r}});
    EXPECT_EQ(sample_pauli(minus_i, PauliString::parse("Y"), 100, rng).mean, -1.0);
}

TEST(SamplePauli, FairCoinForXOnZero) {
    CounterStream rng(derive_key(5, {}));
    const auto s = sample_pauli(StateVector::basis(1, 0), PauliString::parse("X"), 400000, rng);
    EXPECT_NEAR(s.mean, 0.0, 5.0 / std::sqrt(400000.0));
    EXPECT_NEAR(s.sample_variance, 1.0, 1e-4);
}

TEST(SamplePauli, IdentityCostsNothing) {
    CounterStream rng(derive_key(6, {}));
    const auto s = sample_pauli(StateVector::basis(2, 1), PauliString(2), 10, rng);
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.sample_variance, 0.0);
    EXPECT_EQ(rng.position(), 0U);
}

TEST(SamplePauli, ZeroShotsRejected) {
    CounterStream rng(derive_key(6, {}));
    EXPECT_THROW(sample_pauli(StateVector::basis(1, 0), PauliString::parse("Z"), 0, rng), DomainError);
}

TEST(SamplePauli, SameSeedSameStats) {
    std::mt19937_64 gen(2);
    const auto psi = random_state(3, gen);
    CounterStream a(derive_key(77, {1, 2}));
    CounterStream b(derive_key(77, {1, 2}));
    const auto p = PauliString::parse("XYZ");
    const auto sa = sample_pauli(psi, p, 1000, a);
    const auto sb = sample_pauli(psi, p, 1000, b);
    EXPECT_EQ(sa.mean, sb.mean);
    EXPECT_EQ(sa.sample_variance, sb.sample_variance);
}

TEST(SamplePauli, AgreesWithExactWithinFiveSigma) {
    std::mt19937_64 gen(31);
    std::uniform_int_distribution<int> axis(0, 3);
    constexpr std::uint64_t shots = 1000000;
    for (int trial = 0; trial < 20; ++trial) {
        const auto psi = random_state(3, gen);
        PauliString p(3);
        while (p.is_identity()) {
            for (std::size_t q = 0; q < 3; ++q) {
                p.set(q, static_cast<PauliAxis>(axis(gen)));
            }
        }
        CounterStream rng(derive_key(100, {static_cast<std::uint64_t>(trial)}));
        const auto s = sample_pauli(psi, p, shots, rng);
        const double exact = exact_pauli(psi, p);
        const double sigma = std::sqrt((1.0 - exact * exact) / shots);
        EXPECT_NEAR(s.mean, exact, 5.0 * sigma + 1e-12) << p.to_string();
    }
}

TEST(SamplePauli, SpreadOfMeanMatchesReportedVariance) {
    std::mt19937_64 gen(13);
    const auto psi = random_state(2, gen);
    const auto p = PauliString::parse("XZ");
    constexpr int reps = 4000;
    constexpr std::uint64_t shots = 200;
    double sum = 0.0;
    double sum2 = 0.0;
    double reported = 0.0;
    for (int r = 0; r < reps; ++r) {
        CounterStream rng(derive_key(9, {static_cast<std::uint64_t>(r)}));
        const auto s = sample_pauli(psi, p, shots, rng);
        sum += s.mean;
        sum2 += s.mean * s.mean;
        reported += s.sample_variance / shots;
    }
    const double mean = sum / reps;
    const double empirical = sum2 / reps - mean * mean;
    EXPECT_NEAR(empirical / (reported / reps), 1.0, 0.2);
}

TEST(SampleParity, MatchesLiteralSamplerInDistribution) {
    std::mt19937_64 gen(17);
    const auto psi = random_state(3, gen);
    const auto p = PauliString::parse("YXZ");
    const double exact = exact_pauli(psi, p);
    constexpr int reps = 4000;
    constexpr std::uint64_t shots = 51;
    double m_lit = 0.0;
    double m_par = 0.0;
    double v_lit = 0.0;
    double v_par = 0.0;
    for (int r = 0; r < reps; ++r) {
        CounterStream a(derive_key(1, {static_cast<std::uint64_t>(r)}));
        CounterStream b(derive_key(2, {static_cast<std::uint64_t>(r)}));
        const double x = sample_pauli(psi, p, shots, a).mean;
        const double y = sample_parity(exact, shots, b).mean;
        m_lit += x;
        m_par += y;
        v_lit += x * x;
        v_par += y * y;
    }
    m_lit /= reps;
    m_par /= reps;
    v_lit = v_lit / reps - m_lit * m_lit;
    v_par = v_par / reps - m_par * m_par;
    const double se = std::sqrt((1.0 - exact * exact) / shots / reps);
    EXPECT_NEAR(m_lit, m_par, 5.0 * std::sqrt(2.0) * se);
    EXPECT_NEAR(v_lit / v_par, 1.0, 0.15);
}

TEST(SampleStats, UnbiasedVarianceAndSingleShotFallback) {
    const auto s = SampleStats::from_counts(3, 4);
    EXPECT_DOUBLE_EQ(s.mean, 0.5);
    EXPECT_DOUBLE_EQ(s.sample_variance, 4.0 / 3.0 * 0.75);
    const auto one = SampleStats::from_counts(1, 1);
    EXPECT_DOUBLE_EQ(one.mean, 1.0);
    EXPECT_DOUBLE_EQ(one.sample_variance, 0.0);
}

} // namespace
} // namespace qcpmd
