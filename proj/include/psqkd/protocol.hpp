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

#ifndef PSQKD_PROTOCOL_HPP
#define PSQKD_PROTOCOL_HPP

#include "psqkd/types.hpp"

namespace psqkd::protocol {

/// Fiber transmittance at `distance_km` for the given attenuation:
/// T = 10^(-loss_db_per_km * distance_km / 10).
double distance_to_transmittance(double distance_km, double loss_db_per_km);

/// Asymptotic secure key rate in bits per source pulse:
///
///     K = P * (recon_eff * I(A:B2) - chi(B2:EF))
///
/// where P is the post-selection probability (1 for variant none), I is the
/// homodyne mutual information, and chi the Holevo bound computed from the
/// Gaussian extremality argument on the post-selected covariance.
KeyRateResult key_rate(const ProtocolParams &params, const SubtractionMode &mode, int threads = 1);

struct DistancePoint {
    double distance_km = 0;
    KeyRateResult result;
};

/// Key rate across channel distances. With `optimize_alpha` the source
/// strength is re-optimized at every distance, otherwise params.alpha_sq is
/// used as-is.
std::vector<DistancePoint> key_rate_vs_distance(const ProtocolParams &params,
                                                const SubtractionMode &mode,
                                                const std::vector<double> &distances_km,
                                                double loss_db_per_km, bool optimize_alpha,
                                                int threads = 1);

}  // namespace psqkd::protocol

#endif  // PSQKD_PROTOCOL_HPP
