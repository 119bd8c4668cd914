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

#include "psqkd/coeffs.hpp"

#include <algorithm>
#include <cmath>

#include "sum_engine.hpp"

namespace psqkd::coeffs {

namespace {

void check_unit_interval(double x, const char *name) {
    if (!(x >= 0 && x <= 1)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double tmsv_coeff(int n, double mean_photons) {
    if (n < 0) {
        throw std::invalid_argument("photon number must be >= 0");
    }
    if (!(mean_photons >= 0)) {
        throw std::invalid_argument("mean photon number must be >= 0");
    }
    if (mean_photons == 0) {
        return n == 0 ? 1.0 : 0.0;
    }
    return std::exp(0.5 * (n * std::log(mean_photons) - (n + 1) * std::log1p(mean_photons)));
}

double bs_coeff(double T, int n, int k) {
    if (k < 0 || k > n) {
        throw std::invalid_argument("bs_coeff requires 0 <= k <= n");
    }
    check_unit_interval(T, "transmissivity");
    // pow(0, 0) == 1, so the endpoint cases T = 0 and T = 1 fall out naturally.
    return std::exp(0.5 * log_choose(n, k)) * std::pow(T, 0.5 * (n - k)) * std::pow(1.0 - T, 0.5 * k);
}

double zeta_coeff(int n, int k, int m, int l) {
    IndexTuple{n, k, m, l}.validate();
    return std::exp(0.5 * (log_choose(n - k + l, l) + log_choose(k + m - l, k)));
}

void IndexTuple::validate() const {
    if (k < 0 || k > n || l < 0 || l > m) {
        throw std::invalid_argument("index tuple requires 0 <= k <= n and 0 <= l <= m");
    }
}

namespace {

/// Shared core of j_plus / j_minus. `dir` selects upward (+1) or downward
/// (-1) ladder shifts of the second tuple's exchange indices.
double j_sum_one_direction(const IndexTuple &t1, const IndexTuple &t2, double T, double T1, int s,
                           int dir) {
    t1.validate();
    t2.validate();
    check_unit_interval(T, "transmissivity");
    check_unit_interval(T1, "tap transmissivity");
    if (s < 0) {
        throw std::invalid_argument("tap photon count must be >= 0");
    }
    const int b1 = t1.n - t1.k + t1.l;
    const int b2 = t2.n - t2.k + t2.l;
    if (s > b1 || s > b2) {
        return 0.0;  // the tap cannot reflect more photons than arrive
    }
    const double prefix = bs_coeff(T, t1.n, t1.k) * bs_coeff(T, t1.m, t1.l) *
                          zeta_coeff(t1.n, t1.k, t1.m, t1.l) * bs_coeff(T1, b1, s) * bs_coeff(T1, b2, s);
    const int j_lo = dir > 0 ? 0 : 1;
    const int j_hi = dir > 0 ? std::min(t2.n - t2.k, t2.m - t2.l) : std::min(t2.k, t2.l);
    double acc = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        const int k = t2.k + dir * j;
        const int l = t2.l + dir * j;
        const double term = bs_coeff(T, t2.n, k) * bs_coeff(T, t2.m, l) * zeta_coeff(t2.n, k, t2.m, l);
        acc += (j % 2 != 0) ? -term : term;
    }
    return prefix * acc;
}

}  // namespace

double j_plus(const IndexTuple &t1, const IndexTuple &t2, double T, double T1, int s) {
    return j_sum_one_direction(t1, t2, T, T1, s, +1);
}

double j_minus(const IndexTuple &t1, const IndexTuple &t2, double T, double T1, int s) {
    return j_sum_one_direction(t1, t2, T, T1, s, -1);
}

double tap_count_probability(const ProtocolParams &params, int count) {
    params.validate();
    if (count < 0) {
        throw std::invalid_argument("tap photon count must be >= 0");
    }
    const auto weights = detail::exact_count_weights(params, count);
    return detail::accumulate_sums(params, weights, 1, /*p_only=*/true).p;
}

double subtraction_probability(const ProtocolParams &params, const SubtractionMode &mode) {
    params.validate();
    mode.validate();
    if (mode.variant == SubtractionMode::Variant::none) {
        throw std::invalid_argument("subtraction_probability is undefined for variant none");
    }
    const auto weights = detail::mode_weights(params, mode);
    return detail::accumulate_sums(params, weights, 1, /*p_only=*/true).p;
}

}  // namespace psqkd::coeffs
