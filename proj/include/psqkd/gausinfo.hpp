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

#ifndef PSQKD_GAUSINFO_HPP
#define PSQKD_GAUSINFO_HPP

#include "psqkd/types.hpp"

namespace psqkd::gausinfo {

enum class Quadrature { q, p };

/// Symplectic eigenvalues in descending order; physical states have every
/// value >= 1 in shot-noise units.
struct SymplecticSpectrum {
    std::vector<double> values;

    bool physical(double tol = 1e-8) const;
};

/// Von Neumann entropy of a thermal mode with symplectic eigenvalue x, in
/// bits:
///
///     g(x) = ((x + 1) / 2) log2((x + 1) / 2) - ((x - 1) / 2) log2((x - 1) / 2)
///
/// Values in [1 - 1e-6, 1] are clamped to the vacuum (g = 1 gives 0); values
/// below that window throw physicality_error.
double g_function(double x);

/// Symplectic spectrum of a quadrature covariance matrix, computed from the
/// ordinary eigenvalues of i * Omega * Gamma. Throws physicality_error when
/// the eigenvalues fail to form the +/- pairs of a symmetric matrix.
SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix &gamma);

/// Entropy of the Gaussian state with this covariance: sum of g over the
/// symplectic spectrum, in bits.
double gaussian_entropy(const CovarianceMatrix &gamma);

/// Covariance of the remaining modes after an ideal homodyne measurement of
/// one quadrature of `measured_mode`:
///
///     Gamma' = Gamma_rest - (1 / v) L L^T
///
/// where v is the measured quadrature's variance and L the corresponding
/// column of the cross block. Throws physicality_error when v <= 0.
CovarianceMatrix condition_on_homodyne(const CovarianceMatrix &gamma, int measured_mode, Quadrature quad);

/// Mutual information of Alice's and Bob's q quadratures in bits:
/// I = (1/2) log2(V_B2 / (V_B2 - C_AB2^2 / V_A)).
double mutual_information(const CovarianceElements &elements);

/// Holevo bound chi(last mode : other modes) for a homodyne measurement of
/// the last mode's q quadrature: S(others) - S(others | measurement).
double holevo_information(const CovarianceMatrix &gamma);

}  // namespace psqkd::gausinfo

#endif  // PSQKD_GAUSINFO_HPP
