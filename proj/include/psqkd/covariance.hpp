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

#ifndef PSQKD_COVARIANCE_HPP
#define PSQKD_COVARIANCE_HPP

#include "psqkd/types.hpp"

namespace psqkd::covariance {

struct ElementsResult {
    CovarianceElements elements;
    double post_select_prob = 1.0;
};

/// Covariance elements of the post-selected state together with the
/// post-selection probability, from the truncated closed-form sums. For
/// variant none this returns the conventional-protocol closed forms with
/// probability 1. Throws postselection_error when the selected event has
/// vanishing probability.
ElementsResult elements_with_probability(const ProtocolParams &params, const SubtractionMode &mode,
                                         int threads = 1);

/// Same, discarding the probability.
CovarianceElements elements(const ProtocolParams &params, const SubtractionMode &mode,
                            int threads = 1);

/// Conventional protocol (no tap): thermal-loss closed forms, independent of
/// tap_T1 and det_eff.
CovarianceElements baseline_elements(const ProtocolParams &params);

/// 6x6 covariance of (E, F, B2):
///
///     [ V_E I     C_EF sz   C_EB2 I  ]
///     [ C_EF sz   V_F I     C_FB2 sz ]
///     [ C_EB2 I   C_FB2 sz  V_B2 I   ]
///
/// with sz = diag(1, -1). Throws physicality_error when the result is not a
/// valid quantum covariance matrix.
CovarianceMatrix assemble_gamma_efb2(const CovarianceElements &elements);

/// 4x4 covariance of (A, B2) with the C_AB2 sz cross block, validated the
/// same way.
CovarianceMatrix assemble_gamma_ab2(const CovarianceElements &elements);

}  // namespace psqkd::covariance

#endif  // PSQKD_COVARIANCE_HPP
