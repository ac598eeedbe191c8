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
 * @file analysis.hpp
 * Trajectory statistics: mass-weighted internal coordinates, the
 * coordinate covariance and the normal-mode frequencies it implies,
 * block jackknife errors, Gaussian fits with total variation distance,
 * and kinetic temperatures.
 *
 * In the harmonic limit the Boltzmann covariance of mass-weighted
 * displacements is C = A^-1 / beta, so each eigenvalue c of C gives an
 * angular frequency omega = 1 / sqrt(beta c) and the eigenvectors of C are
 * the normal modes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcpmd/dynamics.hpp"
#include "qcpmd/errors.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd::analysis {

struct Trajectory {
    std::vector<Frame> frames;
    /// Per Cartesian coordinate, electron masses.
    Eigen::VectorXd masses;
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t size() const { return frames.size(); }

    /// Time between consecutive frames; requires at least two frames.
    double spacing() const {
        if (frames.size() < 2) {
            throw DomainError("trajectory spacing needs at least two frames");
        }
        return frames[1].time - frames[0].time;
    }

    /// Times strictly increasing and uniformly spaced; coordinate vectors sized like the masses.
    void validate() const {
        const auto n = static_cast<Eigen::Index>(masses.size());
        if (n == 0 || n % 3 != 0) {
            throw DimensionError("trajectory masses must have 3N entries");
        }
        for (const auto& f : frames) {
            if (f.R.size() != n || f.v.size() != n) {
                throw DimensionError("trajectory frame size does not match masses");
            }
        }
        if (frames.size() < 2) {
            return;
        }
        const double dt = spacing();
        if (!(dt > 0.0)) {
            throw DomainError("trajectory times must be strictly increasing");
        }
        for (std::size_t i = 1; i < frames.size(); ++i) {
            const double d = frames[i].time - frames[i - 1].time;
            if (!(d > 0.0) || std::abs(d - dt) > 1e-6 * dt) {
                throw DomainError("trajectory times must be uniformly spaced");
            }
        }
    }
};

/// Half-open frame range [begin, end).
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end > begin ? end - begin : 0; }
};

inline void check_window(const Trajectory& traj, const Window& w) {
    if (w.end > traj.size() || w.size() == 0) {
        throw DomainError("analysis window is empty or outside the trajectory");
    }
}

/// Frames whose time is at least `discard` past the first frame (atomic time units).
inline Window window_after(const Trajectory& traj, double discard) {
    if (traj.frames.empty()) {
        throw DomainError("analysis window is empty: trajectory has no frames");
    }
    const double t0 = traj.frames.front().time + discard;
    const auto it = std::lower_bound(traj.frames.begin(), traj.frames.end(), t0,
                                     [](const Frame& f, double t) { return f.time < t - 1e-9 * std::abs(t); });
    Window w{static_cast<std::size_t>(it - traj.frames.begin()), traj.size()};
    if (w.size() == 0) {
        throw DomainError("analysis window is empty: discard span covers the whole trajectory");
    }
    return w;
}

namespace detail {

inline Eigen::Vector3d atom(const Eigen::VectorXd& x, Eigen::Index a) { return x.segment<3>(3 * a); }

inline Eigen::Vector3d center_of_mass(const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    double total = 0.0;
    for (Eigen::Index a = 0; a < x.size() / 3; ++a) {
        c += m[3 * a] * atom(x, a);
        total += m[3 * a];
    }
    return c / total;
}

/// Mass-weighted Kabsch rotation that best maps centered `x` onto centered `ref`.
inline Eigen::Matrix3d kabsch(const Eigen::MatrixX3d& x, const Eigen::MatrixX3d& ref, const Eigen::VectorXd& w) {
    const Eigen::Matrix3d h = x.transpose() * w.asDiagonal() * ref;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
        d(2, 2) = -1.0;
    }
    return svd.matrixV() * d * svd.matrixU().transpose();
}

inline Eigen::MatrixX3d centered_atoms(const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
    const Eigen::Index n = x.size() / 3;
    const Eigen::Vector3d c = center_of_mass(x, m);
    Eigen::MatrixX3d out(n, 3);
    for (Eigen::Index a = 0; a < n; ++a) {
        out.row(a) = (atom(x, a) - c).transpose();
    }
    return out;
}

/// Orthonormal basis of mass-weighted rigid translations and rotations about `ref`.
inline Eigen::MatrixXd rigid_basis(const Eigen::MatrixX3d& ref, const Eigen::VectorXd& m) {
    const Eigen::Index n = ref.rows();
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(3 * n, 6);
    for (Eigen::Index a = 0; a < n; ++a) {
        const double sm = std::sqrt(m[3 * a]);
        const Eigen::Vector3d r = ref.row(a).transpose();
        for (int k = 0; k < 3; ++k) {
            raw(3 * a + k, k) = sm;
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e[k] = 1.0;
            raw.block<3, 1>(3 * a, 3 + k) = sm * e.cross(r);
        }
    }
    Eigen::MatrixXd basis(3 * n, 0);
    for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd u = raw.col(k);
        const double scale = u.norm();
        for (Eigen::Index j = 0; j < basis.cols(); ++j) {
            u -= basis.col(j).dot(u) * basis.col(j);
        }
        // Rotations about the axis of a linear molecule vanish.
        if (u.norm() > 1e-8 * std::max(scale, 1.0)) {
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = u.normalized();
        }
    }
    return basis;
}

} // namespace detail

/**
 * Mass-weighted displacement series over a window, one row per frame.
 * Diatomics give one column, sqrt(mu_red) (r - <r>). Larger molecules give
 * 3N columns: frames are aligned to the window-mean structure (mass-weighted
 * Kabsch) and rigid translations and rotations are projected out, so the
 * covariance has null modes in those directions.
 */
inline Eigen::MatrixXd internal_coordinates(const Trajectory& traj, const Window& w) {
    check_window(traj, w);
    const Eigen::VectorXd& m = traj.masses;
    const Eigen::Index n_atoms = m.size() / 3;
    const auto rows = static_cast<Eigen::Index>(w.size());
    if (n_atoms == 2) {
        const double mu = m[0] * m[3] / (m[0] + m[3]);
        Eigen::VectorXd r(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto& x = traj.frames[w.begin + static_cast<std::size_t>(i)].R;
            r[i] = (detail::atom(x, 1) - detail::atom(x, 0)).norm();
        }
        return (std::sqrt(mu) * (r.array() - r.mean())).matrix();
    }

    Eigen::VectorXd wa(n_atoms);
    for (Eigen::Index a = 0; a < n_atoms; ++a) {
        wa[a] = m[3 * a];
    }
    std::vector<Eigen::MatrixX3d> aligned(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        aligned[i] = detail::centered_atoms(traj.frames[w.begin + i].R, m);
    }
    Eigen::MatrixX3d ref = aligned.front();
    Eigen::MatrixX3d mean = ref;
    for (int pass = 0; pass < 3; ++pass) {
        mean.setZero();
        for (auto& x : aligned) {
            x = x * detail::kabsch(x, ref, wa).transpose();
            mean += x;
        }
        mean /= static_cast<double>(aligned.size());
        ref = mean;
    }
    const Eigen::MatrixXd rigid = detail::rigid_basis(mean, m);
    Eigen::MatrixXd out(rows, 3 * n_atoms);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::VectorXd q(3 * n_atoms);
        for (Eigen::Index a = 0; a < n_atoms; ++a) {
            q.segment<3>(3 * a) =
                std::sqrt(m[3 * a]) * (aligned[static_cast<std::size_t>(i)].row(a) - mean.row(a)).transpose();
        }
        q -= rigid * (rigid.transpose() * q);
        out.row(i) = q.transpose();
    }
    return out;
}

/// Time-average covariance (1/K normalization) of the rows about their mean.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& series) {
    if (series.rows() < 2) {
        throw DomainError("covariance needs at least two samples");
    }
    const Eigen::RowVectorXd mean = series.colwise().mean();
    const Eigen::MatrixXd centered = series.rowwise() - mean;
    Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(series.rows());
    return 0.5 * (c + c.transpose());
}

inline constexpr double kNullModeFloor = 1e-12;

struct FrequencyReport {
    /// Ascending, cm^-1.
    std::vector<double> frequencies;
    /// Jackknife standard errors aligned with `frequencies`; empty if not computed.
    std::vector<double> standard_errors;
    /// Plain (non-jackknife) estimates aligned with `frequencies`; empty if not computed.
    std::vector<double> plain_frequencies;
    /// Columns are orthonormal normal modes aligned with `frequencies`.
    Eigen::MatrixXd modes;
    Eigen::MatrixXd covariance;
    std::size_t null_modes = 0;
    /// Equilibration span excluded from the statistics, femtoseconds.
    double discarded_fs = 0.0;
    std::size_t samples = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["frequencies_cm-1"] = frequencies;
        j["standard_errors_cm-1"] = standard_errors;
        j["plain_frequencies_cm-1"] = plain_frequencies;
        std::vector<std::vector<double>> mode_list;
        for (Eigen::Index c = 0; c < modes.cols(); ++c) {
            mode_list.emplace_back(modes.col(c).data(), modes.col(c).data() + modes.rows());
        }
        j["normal_modes"] = mode_list;
        std::vector<std::vector<double>> cov;
        for (Eigen::Index r = 0; r < covariance.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(covariance.cols()));
            for (Eigen::Index c = 0; c < covariance.cols(); ++c) {
                row[static_cast<std::size_t>(c)] = covariance(r, c);
            }
            cov.push_back(std::move(row));
        }
        j["covariance_au"] = cov;
        j["null_modes"] = null_modes;
        j["discarded_fs"] = discarded_fs;
        j["samples"] = samples;
        return j;
    }
};

/// Frequencies from C = A^-1 / beta; eigenvalues below kNullModeFloor * max are null modes.
inline FrequencyReport frequencies_from_covariance(const Eigen::MatrixXd& c, double beta) {
    if (c.rows() != c.cols() || c.rows() == 0) {
        throw DimensionError("covariance must be a non-empty square matrix");
    }
    if (!(beta > 0.0)) {
        throw DomainError("beta must be positive");
    }
    const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double top = lam.maxCoeff();
    if (!(top > 0.0) || !std::isfinite(top)) {
        throw DomainError("covariance has no positive eigenvalue: all modes are null");
    }
    FrequencyReport rep;
    rep.covariance = sym;
    std::vector<Eigen::Index> kept;
    // Eigenvalues ascend, so iterate downward to get ascending frequencies.
    for (Eigen::Index i = lam.size() - 1; i >= 0; --i) {
        if (lam[i] > kNullModeFloor * top) {
            kept.push_back(i);
        } else {
            ++rep.null_modes;
        }
    }
    rep.modes.resize(sym.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const double omega = 1.0 / std::sqrt(beta * lam[kept[k]]);
        rep.frequencies.push_back(units::angular_to_wavenumber(omega));
        Eigen::VectorXd v = eig.eigenvectors().col(kept[k]);
        // Sign convention: largest-magnitude component positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) {
            v = -v;
        }
        rep.modes.col(static_cast<Eigen::Index>(k)) = v;
    }
    return rep;
}

struct JackknifeResult {
    /// Bias-corrected jackknife estimates, ascending like the plain report.
    std::vector<double> mean;
    std::vector<double> standard_error;
    /// Full-sample estimates.
    std::vector<double> plain;
    std::size_t bins = 0;
    std::size_t block_length = 0;
};

/**
 * Block jackknife over `bins` contiguous equal blocks; trailing samples that
 * do not fill a block are dropped. Each replicate recomputes the covariance
 * (and its mean) without one block.
 */
inline JackknifeResult jackknife_frequency(const Eigen::MatrixXd& series, std::size_t bins, double beta) {
    if (bins < 2) {
        throw DomainError("jackknife needs at least two bins");
    }
    const auto total = static_cast<std::size_t>(series.rows());
    if (total < bins) {
        throw DomainError("series is shorter than the number of jackknife bins");
    }
    const std::size_t len = total / bins;
    if (len * (bins - 1) < 2) {
        throw DomainError("jackknife blocks too short");
    }
    const auto used = static_cast<Eigen::Index>(len * bins);
    const Eigen::MatrixXd s = series.topRows(used);
    const auto plain = frequencies_from_covariance(covariance(s), beta).frequencies;
    const std::size_t n_modes = plain.size();

    std::vector<std::vector<double>> reps;
    for (std::size_t b = 0; b < bins; ++b) {
        Eigen::MatrixXd rest(used - static_cast<Eigen::Index>(len), s.cols());
        const auto head = static_cast<Eigen::Index>(b * len);
        const auto tail = used - head - static_cast<Eigen::Index>(len);
        rest.topRows(head) = s.topRows(head);
        rest.bottomRows(tail) = s.bottomRows(tail);
        auto f = frequencies_from_covariance(covariance(rest), beta).frequencies;
        if (f.size() != n_modes) {
            throw DomainError("jackknife replicate changed the number of resolved modes");
        }
        reps.push_back(std::move(f));
    }

    JackknifeResult out;
    out.bins = bins;
    out.block_length = len;
    out.plain = plain;
    const double nb = static_cast<double>(bins);
    for (std::size_t k = 0; k < n_modes; ++k) {
        double avg = 0.0;
        for (const auto& r : reps) {
            avg += r[k];
        }
        avg /= nb;
        double ss = 0.0;
        for (const auto& r : reps) {
            ss += (r[k] - avg) * (r[k] - avg);
        }
        out.mean.push_back(nb * plain[k] - (nb - 1.0) * avg);
        out.standard_error.push_back(std::sqrt((nb - 1.0) / nb * ss));
    }
    return out;
}

/// Window covariance analysis with jackknife errors attached to the report.
inline FrequencyReport frequency_analysis(const Trajectory& traj, const Window& w, double beta, std::size_t bins) {
    const Eigen::MatrixXd s = internal_coordinates(traj, w);
    FrequencyReport rep = frequencies_from_covariance(covariance(s), beta);
    const auto jk = jackknife_frequency(s, bins, beta);
    if (jk.mean.size() == rep.frequencies.size()) {
        rep.plain_frequencies = rep.frequencies;
        rep.frequencies = jk.mean;
        rep.standard_errors = jk.standard_error;
    }
    rep.samples = w.size();
    rep.discarded_fs = units::atu_to_fs(traj.frames[w.begin].time - traj.frames.front().time);
    return rep;
}

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    /// Reference Gaussian probability mass per bin.
    std::vector<double> fitted_mass;
};

struct GaussianFit {
    double mean = 0.0;
    double std = 0.0;
    double tv_distance = 0.0;
    std::size_t samples = 0;
    Histogram histogram;

    nlohmann::json to_json() const {
        return {{"mean", mean}, {"std", std}, {"tv_distance", tv_distance}, {"samples", samples}};
    }
};

inline constexpr std::size_t kMinHistogramSamples = 100;

inline double normal_cdf(double x, double mean, double std) {
    return 0.5 * std::erfc(-(x - mean) / (std * std::numbers::sqrt2));
}

/// Sturges bin count, ceil(log2 n) + 1.
inline std::size_t sturges_bins(std::size_t n) {
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

/**
 * TV distance between the sample histogram and a given Gaussian. Bins span
 * [min, max] of the samples (Sturges count); Gaussian mass outside that
 * range counts fully toward the distance.
 */
inline GaussianFit tv_against_gaussian(std::span<const double> samples, double mean, double std) {
    if (samples.size() < kMinHistogramSamples) {
        throw DomainError("histogram needs at least 100 samples");
    }
    if (!(std > 0.0) || !std::isfinite(std)) {
        throw DomainError("degenerate Gaussian: zero standard deviation");
    }
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        throw DomainError("degenerate histogram: all samples equal");
    }
    const std::size_t nb = sturges_bins(samples.size());
    GaussianFit fit;
    fit.mean = mean;
    fit.std = std;
    fit.samples = samples.size();
    auto& h = fit.histogram;
    h.edges.resize(nb + 1);
    for (std::size_t i = 0; i <= nb; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nb);
    }
    h.edges.back() = hi;
    h.counts.assign(nb, 0);
    const double width = (hi - lo) / static_cast<double>(nb);
    for (double x : samples) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        h.counts[std::min(b, nb - 1)] += 1;
    }
    const double n = static_cast<double>(samples.size());
    double tv = normal_cdf(lo, mean, std) + (1.0 - normal_cdf(hi, mean, std));
    h.fitted_mass.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        h.fitted_mass[i] = normal_cdf(h.edges[i + 1], mean, std) - normal_cdf(h.edges[i], mean, std);
        tv += std::abs(static_cast<double>(h.counts[i]) / n - h.fitted_mass[i]);
    }
    fit.tv_distance = 0.5 * tv;
    return fit;
}

/// Maximum-likelihood Gaussian (1/n variance) and its TV distance to the samples.
inline GaussianFit gaussian_fit(std::span<const double> samples) {
    if (samples.size() < kMinHistogramSamples) {
        throw DomainError("histogram needs at least 100 samples");
    }
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    return tv_against_gaussian(samples, mean, std::sqrt(ss / n));
}

/// Bond length of a diatomic per frame in the window, bohr.
inline std::vector<double> bond_lengths(const Trajectory& traj, const Window& w) {
    check_window(traj, w);
    if (traj.masses.size() != 6) {
        throw DimensionError("bond_lengths needs a diatomic trajectory");
    }
    std::vector<double> r;
    r.reserve(w.size());
    for (std::size_t i = w.begin; i < w.end; ++i) {
        const auto& x = traj.frames[i].R;
        r.push_back((detail::atom(x, 1) - detail::atom(x, 0)).norm());
    }
    return r;
}

/// Kinetic energy split into center-of-mass, rigid rotation and remaining vibration.
struct KineticParts {
    double total = 0.0;
    double center_of_mass = 0.0;
    double rotation = 0.0;
    double vibration = 0.0;
    int rotational_dof = 0;
};

inline KineticParts kinetic_parts(const Eigen::VectorXd& R, const Eigen::VectorXd& v, const Eigen::VectorXd& m) {
    const Eigen::Index n = m.size() / 3;
    KineticParts k;
    k.total = 0.5 * (m.array() * v.array().square()).sum();
    const Eigen::Vector3d c = detail::center_of_mass(R, m);
    const Eigen::Vector3d vc = detail::center_of_mass(v, m);
    double total_mass = 0.0;
    Eigen::Vector3d L = Eigen::Vector3d::Zero();
    Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
    for (Eigen::Index a = 0; a < n; ++a) {
        const double ma = m[3 * a];
        total_mass += ma;
        const Eigen::Vector3d r = detail::atom(R, a) - c;
        const Eigen::Vector3d u = detail::atom(v, a) - vc;
        L += ma * r.cross(u);
        inertia += ma * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
    }
    k.center_of_mass = 0.5 * total_mass * vc.squaredNorm();
    if (n > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(inertia);
        const double top = eig.eigenvalues().maxCoeff();
        for (int i = 0; i < 3; ++i) {
            const double I = eig.eigenvalues()[i];
            if (I > 1e-10 * top) {
                const double l = eig.eigenvectors().col(i).dot(L);
                k.rotation += 0.5 * l * l / I;
                ++k.rotational_dof;
            }
        }
    }
    k.vibration = std::max(0.0, k.total - k.center_of_mass - k.rotation);
    return k;
}

/// Window-averaged kinetic temperatures, kelvin; each part divided by its own degree-of-freedom count.
struct KineticTemperatures {
    double total = 0.0;
    double center_of_mass = 0.0;
    double rotation = 0.0;
    double vibration = 0.0;
    int vibrational_dof = 0;

    nlohmann::json to_json() const {
        return {{"total_K", total},
                {"center_of_mass_K", center_of_mass},
                {"rotation_K", rotation},
                {"vibration_K", vibration},
                {"vibrational_dof", vibrational_dof}};
    }
};

inline KineticTemperatures kinetic_temperature(const Trajectory& traj, const Window& w) {
    check_window(traj, w);
    const Eigen::VectorXd& m = traj.masses;
    KineticParts sum;
    for (std::size_t i = w.begin; i < w.end; ++i) {
        const auto k = kinetic_parts(traj.frames[i].R, traj.frames[i].v, m);
        sum.total += k.total;
        sum.center_of_mass += k.center_of_mass;
        sum.rotation += k.rotation;
        sum.vibration += k.vibration;
        sum.rotational_dof = k.rotational_dof;
    }
    const double count = static_cast<double>(w.size());
    const auto temp = [&](double ke, int dof) {
        return dof > 0 ? 2.0 * ke / count / (units::kBoltzmann * dof) : 0.0;
    };
    const int n_coords = static_cast<int>(m.size());
    KineticTemperatures t;
    t.vibrational_dof = std::max(0, n_coords - 3 - sum.rotational_dof);
    t.total = temp(sum.total, n_coords);
    t.center_of_mass = temp(sum.center_of_mass, 3);
    t.rotation = temp(sum.rotation, sum.rotational_dof);
    t.vibration = temp(sum.vibration, t.vibrational_dof);
    return t;
}

} // namespace qcpmd::analysis
