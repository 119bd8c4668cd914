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

#include "psqkd/protocol.hpp"

#include <cmath>

#include "psqkd/covariance.hpp"
#include "psqkd/gausinfo.hpp"
#include "psqkd/optimize.hpp"

namespace psqkd::protocol {

double distance_to_transmittance(double distance_km, double loss_db_per_km) {
    if (!(distance_km >= 0)) {
        throw std::invalid_argument("distance must be >= 0 km");
    }
    if (!(loss_db_per_km >= 0)) {
        throw std::invalid_argument("fiber loss must be >= 0 dB/km");
    }
    return std::pow(10.0, -loss_db_per_km * distance_km / 10.0);
}

KeyRateResult key_rate(const ProtocolParams &params, const SubtractionMode &mode, int threads) {
    const auto [elements, prob] = covariance::elements_with_probability(params, mode, threads);

    KeyRateResult result;
    result.post_select_prob = prob;
    result.mutual_info = gausinfo::mutual_information(elements);
    result.holevo = gausinfo::holevo_information(covariance::assemble_gamma_efb2(elements));
    result.key_rate = prob * (params.recon_eff * result.mutual_info - result.holevo);
    result.elements = elements;
    result.params = params;
    result.mode = mode;
    return result;
}

std::vector<DistancePoint> key_rate_vs_distance(const ProtocolParams &params,
                                                const SubtractionMode &mode,
                                                const std::vector<double> &distances_km,
                                                double loss_db_per_km, bool optimize_alpha,
                                                int threads) {
    std::vector<DistancePoint> points;
    points.reserve(distances_km.size());
    for (double d : distances_km) {
        ProtocolParams at = params;
        at.channel_T = distance_to_transmittance(d, loss_db_per_km);
        if (optimize_alpha) {
            at.alpha_sq = optimize::optimize_alpha(at, mode, threads).best_alpha_sq;
        }
        points.push_back({d, key_rate(at, mode, threads)});
    }
    return points;
}

}  // namespace psqkd::protocol
