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
 * @file optimize.hpp
 * BFGS with an inverse-Hessian update and backtracking Armijo line search.
 */
#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace qcpmd {

struct BfgsOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-6; // on the Euclidean norm
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 20;
    /// After a failed line search, retry once along -g with a reset Hessian.
    bool reset_on_failure = true;
};

enum class BfgsStatus { converged, max_iterations, line_search_failed, non_finite };

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int value_evaluations = 0;
    int gradient_evaluations = 0;
    BfgsStatus status = BfgsStatus::max_iterations;
};

/// Value-only and gradient-only callbacks, so callers can account for their costs separately.
struct Objective {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

inline BfgsResult bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {}) {
    BfgsResult r;
    const Eigen::Index n = x0.size();
    r.x = std::move(x0);
    r.value = f.value(r.x);
    r.gradient = f.gradient(r.x);
    r.value_evaluations = 1;
    r.gradient_evaluations = 1;
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    bool reset = false;

    for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
        if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
            r.status = BfgsStatus::non_finite;
            return r;
        }
        if (r.gradient.norm() < opts.gradient_tolerance) {
            r.status = BfgsStatus::converged;
            return r;
        }
        Eigen::VectorXd p = -hinv * r.gradient;
        double slope = r.gradient.dot(p);
        if (!(slope < 0.0)) {
            hinv.setIdentity();
            p = -r.gradient;
            slope = -r.gradient.squaredNorm();
        }
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = 0.0;
        for (int b = 0; b <= opts.max_backtracks; ++b) {
            x_new = r.x + step * p;
            f_new = f.value(x_new);
            ++r.value_evaluations;
            if (std::isfinite(f_new) && f_new <= r.value + opts.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            if (opts.reset_on_failure && !reset) {
                reset = true;
                hinv.setIdentity();
                continue;
            }
            r.status = BfgsStatus::line_search_failed;
            return r;
        }
        reset = false;
        const Eigen::VectorXd g_new = f.gradient(x_new);
        ++r.gradient_evaluations;
        const Eigen::VectorXd s = x_new - r.x;
        const Eigen::VectorXd y = g_new - r.gradient;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (r.iterations == 0) {
                hinv *= sy / y.squaredNorm();
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(n, n);
            hinv = (i - rho * s * y.transpose()) * hinv * (i - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        r.x = std::move(x_new);
        r.value = f_new;
        r.gradient = g_new;
    }
    r.status = r.gradient.norm() < opts.gradient_tolerance ? BfgsStatus::converged : BfgsStatus::max_iterations;
    return r;
}

inline const char* status_name(BfgsStatus s) {
    switch (s) {
    case BfgsStatus::converged: return "converged";
    case BfgsStatus::max_iterations: return "max_iterations";
    case BfgsStatus::line_search_failed: return "line_search_failed";
    case BfgsStatus::non_finite: return "non_finite";
    }
    return "unknown";
}

} // namespace qcpmd
