// Copyright 2026 The psqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "psqkd/gausinfo.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace psqkd::gausinfo {

bool SymplecticSpectrum::physical(double tol) const {
    return std::all_of(values.begin(), values.end(), [tol](double v) { return v >= 1.0 - tol; });
}

double g_function(double x) {
    if (!std::isfinite(x) || x < 1.0 - 1e-6) {
        throw physicality_error("g_function requires a symplectic eigenvalue >= 1, got " +
                                std::to_string(x));
    }
    if (x <= 1.0) {
        return 0.0;  // vacuum mode, within roundoff
    }
    const double up = 0.5 * (x + 1.0);
    const double dn = 0.5 * (x - 1.0);
    return up * std::log2(up) - dn * std::log2(dn);
}

SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix &gamma) {
    gamma.validate_shape();
    const int n = gamma.num_modes();
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n);

    // Symplectic form in (q1, p1, q2, p2, ...) ordering.
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        omega(2 * i, 2 * i + 1) = 1.0;
        omega(2 * i + 1, 2 * i) = -1.0;
    }

    // The eigenvalues of i * Omega * Gamma are +/- the symplectic spectrum.
    const Eigen::MatrixXd m = omega * gamma.entries;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw physicality_error("eigenvalue iteration failed on i * Omega * Gamma");
    }

    std::vector<double> mags(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        mags[i] = std::abs(solver.eigenvalues()(i));
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());

    SymplecticSpectrum spectrum;
    spectrum.values.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double a = mags[2 * i];
        const double b = mags[2 * i + 1];
        if (std::abs(a - b) > 1e-9 * std::max(1.0, a)) {
            throw physicality_error("symplectic eigenvalues failed to pair: " + std::to_string(a) +
                                    " vs " + std::to_string(b));
        }
        spectrum.values.push_back(0.5 * (a + b));
    }
    return spectrum;
}

double gaussian_entropy(const CovarianceMatrix &gamma) {
    const SymplecticSpectrum spectrum = symplectic_eigenvalues(gamma);
    double total = 0.0;
    for (double nu : spectrum.values) {
        total += g_function(nu);
    }
    return total;
}

CovarianceMatrix condition_on_homodyne(const CovarianceMatrix &gamma, int measured_mode, Quadrature quad) {
    gamma.validate_shape();
    const int n = gamma.num_modes();
    if (measured_mode < 0 || measured_mode >= n) {
        throw std::invalid_argument("measured mode index out of range");
    }
    if (n < 2) {
        throw std::invalid_argument("conditioning requires at least two modes");
    }
    const Eigen::Index offset = quad == Quadrature::q ? 0 : 1;
    const Eigen::Index pivot = 2 * static_cast<Eigen::Index>(measured_mode) + offset;
    const double v = gamma.entries(pivot, pivot);
    if (!(v > 0)) {
        throw physicality_error("measured quadrature variance must be positive, got " +
                                std::to_string(v));
    }

    std::vector<Eigen::Index> rest;
    rest.reserve(2 * (n - 1));
    for (int i = 0; i < n; ++i) {
        if (i == measured_mode) {
            continue;
        }
        rest.push_back(2 * i);
        rest.push_back(2 * i + 1);
    }

    CovarianceMatrix out;
    out.entries.resize(static_cast<Eigen::Index>(rest.size()), static_cast<Eigen::Index>(rest.size()));
    Eigen::VectorXd cross(rest.size());
    for (size_t i = 0; i < rest.size(); ++i) {
        cross(static_cast<Eigen::Index>(i)) = gamma.entries(rest[i], pivot);
    }
    for (size_t i = 0; i < rest.size(); ++i) {
        for (size_t j = 0; j < rest.size(); ++j) {
            out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                gamma.entries(rest[i], rest[j]) - cross(static_cast<Eigen::Index>(i)) *
                                                      cross(static_cast<Eigen::Index>(j)) / v;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (i != measured_mode) {
            out.mode_order.push_back(gamma.mode_order[i]);
        }
    }
    return out;
}

double mutual_information(const CovarianceElements &elements) {
    elements.validate();
    const double v_cond = elements.V_B2 - elements.C_AB2 * elements.C_AB2 / elements.V_A;
    if (!(v_cond > 0)) {
        throw physicality_error("conditional variance V_B2|A must be positive, got " +
                                std::to_string(v_cond));
    }
    return 0.5 * std::log2(elements.V_B2 / v_cond);
}

double holevo_information(const CovarianceMatrix &gamma) {
    gamma.validate_shape();
    const int n = gamma.num_modes();
    if (n < 2) {
        throw std::invalid_argument("holevo_information requires at least two modes");
    }

    CovarianceMatrix unmeasured;
    unmeasured.entries = gamma.entries.topLeftCorner(2 * (n - 1), 2 * (n - 1));
    unmeasured.mode_order.assign(gamma.mode_order.begin(), gamma.mode_order.end() - 1);

    const double before = gaussian_entropy(unmeasured);
    const double after = gaussian_entropy(condition_on_homodyne(gamma, n - 1, Quadrature::q));
    return before - after;
}

}  // namespace psqkd::gausinfo
