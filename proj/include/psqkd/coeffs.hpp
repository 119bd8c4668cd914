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

#ifndef PSQKD_COEFFS_HPP
#define PSQKD_COEFFS_HPP

#include "psqkd/types.hpp"

namespace psqkd::coeffs {

/// Photon-number amplitude of a two-mode squeezed vacuum with mean photon
/// number mu per mode:
///
///     c_n = sqrt(mu^n / (1 + mu)^(n + 1))
///
/// so that sum_n c_n^2 = 1. Requires n >= 0 and mu >= 0; c_0(0) = 1.
double tmsv_coeff(int n, double mean_photons);

/// Beam-splitter amplitude for routing k of n photons into the reflected
/// port of a transmissivity-T splitter:
///
///     g_{n,k} = sqrt(C(n, k)) * T^((n - k) / 2) * (1 - T)^(k / 2)
///
/// Requires 0 <= k <= n and T in [0, 1].
double bs_coeff(double T, int n, int k);

/// Combinatorial weight coupling the two interfering beam-splitter outputs:
///
///     zeta_{n,k,m,l} = sqrt(C(n - k + l, l)) * sqrt(C(k + m - l, k))
///
/// Requires 0 <= k <= n and 0 <= l <= m.
double zeta_coeff(int n, int k, int m, int l);

/// One term of the four-index interference sums: source photon numbers
/// (n, m) of which (k, l) are exchanged between the signal and noise arms.
struct IndexTuple {
    int n = 0;
    int k = 0;
    int m = 0;
    int l = 0;

    /// Throws std::invalid_argument unless 0 <= k <= n and 0 <= l <= m.
    void validate() const;
};

/// Interference sum over ladder shifts j >= 0 applied to the second tuple:
///
///     J+ = sum_{j=0}^{min(n2-k2, m2-l2)} (-1)^j
///          g_{n1,k1} g_{n2,k2+j} g_{m1,l1} g_{m2,l2+j}
///          zeta_{n1,k1,m1,l1} zeta_{n2,k2+j,m2,l2+j}
///          g1_{n1-k1+l1, s} g1_{n2-k2+l2, s}
///
/// where g uses transmissivity T, g1 uses the tap transmissivity T1, and the
/// tap amplitudes depend on the unshifted photon numbers. Requires valid
/// tuples, T and T1 in [0, 1], and s >= 0.
double j_plus(const IndexTuple &t1, const IndexTuple &t2, double T, double T1, int s);

/// Same as j_plus but for downward shifts j = 1 .. min(k2, l2), replacing
/// k2 + j and l2 + j with k2 - j and l2 - j.
double j_minus(const IndexTuple &t1, const IndexTuple &t2, double T, double T1, int s);

/// Probability that the tap detector announces exactly `count` photons,
/// including binomial thinning by det_eff when the placement is
/// subtraction_tap. Accepts count >= 0 (count = 0 is the no-click weight).
double tap_count_probability(const ProtocolParams &params, int count);

/// Success probability P of the configured subtraction test: the exact-count
/// probability for `counter`, the click probability for `detector`.
/// Throws std::invalid_argument for variant none.
double subtraction_probability(const ProtocolParams &params, const SubtractionMode &mode);

}  // namespace psqkd::coeffs

#endif  // PSQKD_COEFFS_HPP
