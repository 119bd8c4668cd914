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

#ifndef PSQKD_SUM_ENGINE_HPP
#define PSQKD_SUM_ENGINE_HPP

#include <vector>

#include "psqkd/types.hpp"

namespace psqkd::detail {

/// Raw accumulator values of the truncated four-index interference sums.
/// `p` is the post-selection probability; the remaining entries are
/// probability-weighted photon-number and ladder-pairing sums that the
/// covariance module normalizes into CovarianceElements.
struct RawSums {
    double p = 0;
    double num_a = 0;    ///< sum weighted by Alice's photon number n
    double num_b2 = 0;   ///< weighted by Bob's kept photon number b - s
    double num_e = 0;    ///< weighted by Eve's photon number k + m - l
    double num_f = 0;    ///< weighted by the purification photon number m
    double cr_ab2 = 0;   ///< ladder pairing A x B2
    double cr_ef = 0;    ///< ladder pairing E x F
    double cr_eb2 = 0;   ///< ladder pairing E x B2
    double cr_fb2 = 0;   ///< ladder pairing F x B2
};

/// Detector weights w(s) over the announced-versus-arrived photon count,
/// indexed by the arrived count s = 0 .. 2 * n_max. The engine folds these
/// into its tap-amplitude tables, so thinning by a lossy counter costs
/// nothing extra per term.
std::vector<double> mode_weights(const ProtocolParams &params, const SubtractionMode &mode);

/// Weights for the event "the detector announces exactly `count` photons",
/// independent of the subtraction variant. count = 0 is the no-click weight.
std::vector<double> exact_count_weights(const ProtocolParams &params, int count);

/// Evaluates all truncated interference sums in one pass over the index
/// tuples (n, k, m, l). `threads` splits the (n, k) outer loop into
/// fixed-size tasks whose partial sums are reduced in index order, so the
/// result is bit-identical for every thread count. With `p_only` the
/// ladder-pairing accumulators are skipped (about half the work).
RawSums accumulate_sums(const ProtocolParams &params, const std::vector<double> &weights, int threads,
                        bool p_only);

}  // namespace psqkd::detail

#endif  // PSQKD_SUM_ENGINE_HPP
