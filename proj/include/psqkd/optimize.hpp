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

#ifndef PSQKD_OPTIMIZE_HPP
#define PSQKD_OPTIMIZE_HPP

#include "psqkd/types.hpp"

namespace psqkd::optimize {

struct OptResult {
    double best_alpha_sq = 0;
    double best_key_rate = 0;
    double bracket_lo = 0;  ///< final search bracket, lower edge (alpha_sq)
    double bracket_hi = 0;  ///< final search bracket, upper edge (alpha_sq)
    int evaluations = 0;
    bool all_nonpositive = false;  ///< no positive key rate anywhere on the grid
};

/// Maximizes the key rate over the source strength alpha_sq at fixed channel
/// parameters: a 17-point log-spaced coarse grid on [1e-2, 1e2] followed by
/// golden-section refinement of the best bracket to relative width 1e-3.
/// Parameter sets that throw physicality or post-selection errors count as
/// key rate -infinity.
OptResult optimize_alpha(const ProtocolParams &params, const SubtractionMode &mode, int threads = 1);

/// Same search with the channel transmittance derived from a fiber length in
/// km at the given attenuation; every other parameter is taken from `params`.
OptResult optimize_alpha(const ProtocolParams &params, const SubtractionMode &mode,
                         double distance_km, double loss_db_per_km, int threads = 1);

/// Largest distance with a positive optimized key rate, by 5 km coarse
/// scanning from 0 followed by bisection to a 0.01 km bracket; returns the
/// bracket midpoint, 0 when the rate is nonpositive already at distance 0,
/// and the scan cap (500 km) when the rate never turns negative.
double max_distance(const ProtocolParams &params, const SubtractionMode &mode,
                    double loss_db_per_km, int threads = 1);

}  // namespace psqkd::optimize

#endif  // PSQKD_OPTIMIZE_HPP
