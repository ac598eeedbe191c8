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
 * @file operator.hpp
 * Pauli strings, real-weighted Pauli sums, and their dense realization.
 *
 * A PauliString is stored as a pair of bit masks: bit q of x_mask is set for
 * X or Y on qubit q, bit q of z_mask for Z or Y. Acting on a basis state,
 *   P |c> = i^{#Y} (-1)^{popcount(c & z_mask)} |c ^ x_mask>.
 * The text form "IXYZ..." lists qubit 0 first.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcpmd/errors.hpp"
#include "qcpmd/state_vector.hpp"

namespace qcpmd {

enum class PauliAxis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline constexpr char axis_char(PauliAxis a) {
    constexpr char chars[] = {'I', 'X', 'Y', 'Z'};
    return chars[static_cast<std::uint8_t>(a)];
}

class PauliString {
  public:
    static constexpr std::size_t kMaxQubits = 64;

    PauliString() = default;

    /// Identity on n qubits.
    explicit PauliString(std::size_t n_qubits) : n_{static_cast<std::uint32_t>(n_qubits)} {
        if (n_qubits > kMaxQubits) {
            throw DimensionError("Pauli strings support at most 64 qubits");
        }
    }

    PauliString(std::size_t n_qubits, std::uint64_t x_mask, std::uint64_t z_mask)
        : PauliString(n_qubits) {
        const std::uint64_t valid = n_qubits == 64 ? ~0ULL : ((1ULL << n_qubits) - 1ULL);
        if (((x_mask | z_mask) & ~valid) != 0) {
            throw DimensionError("Pauli mask touches qubits beyond n_qubits");
        }
        x_ = x_mask;
        z_ = z_mask;
    }

    static PauliString parse(std::string_view axes) {
        PauliString p(axes.size());
        for (std::size_t q = 0; q < axes.size(); ++q) {
            switch (axes[q]) {
            case 'I': break;
            case 'X': p.set(q, PauliAxis::X); break;
            case 'Y': p.set(q, PauliAxis::Y); break;
            case 'Z': p.set(q, PauliAxis::Z); break;
            default:
                throw DomainError(std::string("invalid Pauli axis '") + axes[q] + "' in \"" +
                                  std::string(axes) + "\"");
            }
        }
        return p;
    }

    /// Single-qubit Pauli embedded in n qubits.
    static PauliString single(std::size_t n_qubits, std::size_t qubit, PauliAxis axis) {
        PauliString p(n_qubits);
        p.set(qubit, axis);
        return p;
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_; }
    [[nodiscard]] std::uint64_t x_mask() const { return x_; }
    [[nodiscard]] std::uint64_t z_mask() const { return z_; }
    [[nodiscard]] std::uint64_t support() const { return x_ | z_; }
    [[nodiscard]] bool is_identity() const { return (x_ | z_) == 0; }
    [[nodiscard]] int y_count() const { return std::popcount(x_ & z_); }
    [[nodiscard]] bool is_real() const { return y_count() % 2 == 0; }

    [[nodiscard]] PauliAxis axis(std::size_t q) const {
        const bool x = ((x_ >> q) & 1ULL) != 0;
        const bool z = ((z_ >> q) & 1ULL) != 0;
        if (x && z) {
            return PauliAxis::Y;
        }
        if (x) {
            return PauliAxis::X;
        }
        return z ? PauliAxis::Z : PauliAxis::I;
    }

    void set(std::size_t q, PauliAxis a) {
        if (q >= n_) {
            throw DimensionError("qubit index " + std::to_string(q) + " out of range");
        }
        const std::uint64_t bit = 1ULL << q;
        x_ &= ~bit;
        z_ &= ~bit;
        if (a == PauliAxis::X || a == PauliAxis::Y) {
            x_ |= bit;
        }
        if (a == PauliAxis::Z || a == PauliAxis::Y) {
            z_ |= bit;
        }
    }

    [[nodiscard]] std::string to_string() const {
        std::string s(n_, 'I');
        for (std::size_t q = 0; q < n_; ++q) {
            s[q] = axis_char(axis(q));
        }
        return s;
    }

    /// Lexicographic on the axes text (I < X < Y < Z), qubit 0 first.
    friend std::strong_ordering operator<=>(const PauliString& a, const PauliString& b) {
        if (auto c = a.n_ <=> b.n_; c != 0) {
            return c;
        }
        const std::uint64_t diff = (a.x_ ^ b.x_) | (a.z_ ^ b.z_);
        if (diff == 0) {
            return std::strong_ordering::equal;
        }
        const auto q = static_cast<std::size_t>(std::countr_zero(diff));
        return static_cast<std::uint8_t>(a.axis(q)) <=> static_cast<std::uint8_t>(b.axis(q));
    }
    friend bool operator==(const PauliString& a, const PauliString& b) = default;

  private:
    std::uint32_t n_ = 0;
    std::uint64_t x_ = 0;
    std::uint64_t z_ = 0;
};

/// Phase i^k for k in [0, 4).
inline Complex i_power(int k) {
    switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

/// Matrix element <row| P |col>.
inline Complex pauli_element(const PauliString& p, std::uint64_t row, std::uint64_t col) {
    if ((col ^ p.x_mask()) != row) {
        return {0.0, 0.0};
    }
    const int sign_flips = std::popcount(col & p.z_mask());
    Complex phase = i_power(p.y_count());
    return (sign_flips % 2 == 0) ? phase : -phase;
}

struct PauliTerm {
    PauliString string;
    double coeff = 0.0;

    friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Terms with |c| below this after arithmetic are dropped.
inline constexpr double kPruneThreshold = 1e-12;

/**
 * @brief Real linear combination of Pauli strings on a fixed qubit count.
 *
 * Terms are kept sorted by PauliString ordering, without duplicates, and
 * without entries whose magnitude is below kPruneThreshold. Instances are
 * immutable once constructed.
 */
class QubitOperator {
  public:
    QubitOperator() = default;
    explicit QubitOperator(std::size_t n_qubits) : n_qubits_{n_qubits} {}

    /// Builds from arbitrary terms: duplicates are summed, then pruned.
    static QubitOperator from_terms(std::size_t n_qubits, std::vector<PauliTerm> terms) {
        for (const auto& t : terms) {
            if (t.string.n_qubits() != n_qubits) {
                throw DimensionError("term " + t.string.to_string() + " has " +
                                     std::to_string(t.string.n_qubits()) + " qubits, operator has " +
                                     std::to_string(n_qubits));
            }
        }
        std::stable_sort(terms.begin(), terms.end(),
                         [](const PauliTerm& a, const PauliTerm& b) { return a.string < b.string; });
        QubitOperator op(n_qubits);
        for (const auto& t : terms) {
            if (!op.terms_.empty() && op.terms_.back().string == t.string) {
                op.terms_.back().coeff += t.coeff;
            } else {
                op.terms_.push_back(t);
            }
        }
        op.prune();
        return op;
    }

    static QubitOperator single(const PauliString& p, double coeff) {
        return from_terms(p.n_qubits(), {PauliTerm{p, coeff}});
    }

    static QubitOperator identity(std::size_t n_qubits, double coeff = 1.0) {
        return single(PauliString(n_qubits), coeff);
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] const std::vector<PauliTerm>& terms() const { return terms_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

    /// Coefficient of p, zero when absent.
    [[nodiscard]] double coefficient(const PauliString& p) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                                   [](const PauliTerm& t, const PauliString& s) { return t.string < s; });
        return (it != terms_.end() && it->string == p) ? it->coeff : 0.0;
    }

    [[nodiscard]] bool contains(const PauliString& p) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                                   [](const PauliTerm& t, const PauliString& s) { return t.string < s; });
        return it != terms_.end() && it->string == p;
    }

    [[nodiscard]] bool same_term_set(const QubitOperator& other) const {
        if (n_qubits_ != other.n_qubits_ || terms_.size() != other.terms_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (terms_[i].string != other.terms_[i].string) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] std::size_t non_identity_count() const {
        return static_cast<std::size_t>(std::count_if(terms_.begin(), terms_.end(),
                                                      [](const PauliTerm& t) { return !t.string.is_identity(); }));
    }

    [[nodiscard]] QubitOperator scaled(double factor) const {
        QubitOperator out(n_qubits_);
        out.terms_ = terms_;
        for (auto& t : out.terms_) {
            t.coeff *= factor;
        }
        out.prune();
        return out;
    }

    friend QubitOperator operator+(const QubitOperator& a, const QubitOperator& b) {
        if (a.n_qubits_ != b.n_qubits_) {
            throw DimensionError("cannot add operators on " + std::to_string(a.n_qubits_) + " and " +
                                 std::to_string(b.n_qubits_) + " qubits");
        }
        QubitOperator out(a.n_qubits_);
        out.terms_.reserve(a.terms_.size() + b.terms_.size());
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < a.terms_.size() || j < b.terms_.size()) {
            if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].string < b.terms_[j].string)) {
                out.terms_.push_back(a.terms_[i++]);
            } else if (i == a.terms_.size() || b.terms_[j].string < a.terms_[i].string) {
                out.terms_.push_back(b.terms_[j++]);
            } else {
                out.terms_.push_back({a.terms_[i].string, a.terms_[i].coeff + b.terms_[j].coeff});
                ++i;
                ++j;
            }
        }
        out.prune();
        return out;
    }

    friend QubitOperator operator-(const QubitOperator& a, const QubitOperator& b) { return a + b.scaled(-1.0); }

    friend bool operator==(const QubitOperator&, const QubitOperator&) = default;

  private:
    void prune() {
        std::erase_if(terms_, [](const PauliTerm& t) { return !(std::abs(t.coeff) >= kPruneThreshold); });
    }

    std::size_t n_qubits_ = 0;
    std::vector<PauliTerm> terms_;
};

inline void to_json(nlohmann::json& j, const QubitOperator& op) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : op.terms()) {
        terms.push_back({{"axes", t.string.to_string()}, {"coeff", t.coeff}});
    }
    j = nlohmann::json{{"n_qubits", op.n_qubits()}, {"terms", std::move(terms)}};
}

inline void from_json(const nlohmann::json& j, QubitOperator& op) {
    const auto n = j.at("n_qubits").get<std::size_t>();
    std::vector<PauliTerm> terms;
    for (const auto& t : j.at("terms")) {
        terms.push_back({PauliString::parse(t.at("axes").get<std::string>()), t.at("coeff").get<double>()});
    }
    op = QubitOperator::from_terms(n, std::move(terms));
}

inline constexpr std::size_t kDenseQubitCap = 12;

/// Dense 2^n x 2^n matrix of the operator.
inline Eigen::MatrixXcd dense_matrix(const QubitOperator& op, std::size_t cap = kDenseQubitCap) {
    if (op.n_qubits() > cap) {
        throw DimensionError("dense realization limited to " + std::to_string(cap) + " qubits, operator has " +
                             std::to_string(op.n_qubits()));
    }
    const std::size_t dim = std::size_t{1} << op.n_qubits();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& t : op.terms()) {
        const Complex phase = i_power(t.string.y_count()) * t.coeff;
        for (std::uint64_t col = 0; col < dim; ++col) {
            const std::uint64_t row = col ^ t.string.x_mask();
            const bool flip = (std::popcount(col & t.string.z_mask()) % 2) != 0;
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += flip ? -phase : phase;
        }
    }
    return m;
}

/// <psi|P|psi> for a single Pauli string, without sampling.
inline double pauli_expectation(const StateVector& psi, const PauliString& p) {
    if (p.n_qubits() != psi.n_qubits()) {
        throw DimensionError("Pauli string and state qubit counts differ");
    }
    if (p.is_identity()) {
        return psi.norm_squared();
    }
    const auto amps = psi.amplitudes();
    const std::uint64_t xm = p.x_mask();
    const std::uint64_t zm = p.z_mask();
    Complex acc{0.0, 0.0};
    for (std::uint64_t c = 0; c < amps.size(); ++c) {
        const Complex term = std::conj(amps[c ^ xm]) * amps[c];
        acc += (std::popcount(c & zm) % 2 == 0) ? term : -term;
    }
    return (i_power(p.y_count()) * acc).real();
}

/// <psi|H|psi> in the infinite-shot limit.
inline double exact_expectation(const QubitOperator& op, const StateVector& psi) {
    if (op.n_qubits() != psi.n_qubits()) {
        throw DimensionError("operator acts on " + std::to_string(op.n_qubits()) + " qubits, state has " +
                             std::to_string(psi.n_qubits()));
    }
    const double norm2 = psi.norm_squared();
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        throw DomainError("state is not normalized: |psi|^2 = " + std::to_string(norm2));
    }
    const auto amps = psi.amplitudes();
    Complex total{0.0, 0.0};
    double scale = 0.0;
    for (const auto& t : op.terms()) {
        Complex acc{0.0, 0.0};
        const std::uint64_t xm = t.string.x_mask();
        const std::uint64_t zm = t.string.z_mask();
        for (std::uint64_t c = 0; c < amps.size(); ++c) {
            const Complex term = std::conj(amps[c ^ xm]) * amps[c];
            acc += (std::popcount(c & zm) % 2 == 0) ? term : -term;
        }
        total += i_power(t.string.y_count()) * acc * t.coeff;
        scale += std::abs(t.coeff);
    }
    if (std::abs(total.imag()) > 1e-12 * std::max(1.0, scale)) {
        throw DomainError("expectation has imaginary residue " + std::to_string(total.imag()));
    }
    return total.real();
}

struct Eigenpair {
    double value = 0.0;
    Eigen::VectorXcd vector;
};

/// Lowest eigenvalue and a unit eigenvector via dense Hermitian diagonalization.
inline Eigenpair min_eigenpair(const QubitOperator& op, std::size_t cap = kDenseQubitCap) {
    const Eigen::MatrixXcd m = dense_matrix(op, cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("Hermitian eigensolver failed");
    }
    return {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
}

/// Wraps an Eigen vector as a StateVector.
inline StateVector to_state(const Eigen::VectorXcd& v) {
    std::vector<Complex> amps(v.data(), v.data() + v.size());
    return StateVector::normalized(std::move(amps));
}

} // namespace qcpmd
