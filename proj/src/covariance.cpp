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

#include "psqkd/covariance.hpp"

#include <cmath>

#include "psqkd/gausinfo.hpp"
#include "sum_engine.hpp"

namespace psqkd::covariance {

namespace {

/// Trusted loss in front of Bob's homodyne detector: the measured mode is
/// attenuated, the other modes are untouched.
void apply_homodyne_loss(CovarianceElements &e, double eta) {
    const double root = std::sqrt(eta);
    e.V_B2 = eta * e.V_B2 + (1.0 - eta);
    e.C_AB2 *= root;
    e.C_EB2 *= root;
    e.C_FB2 *= root;
}

void fill_block(Eigen::MatrixXd &m, int mode_i, int mode_j, double value, bool sz) {
    m(2 * mode_i, 2 * mode_j) = value;
    m(2 * mode_i + 1, 2 * mode_j + 1) = sz ? -value : value;
    m(2 * mode_j, 2 * mode_i) = value;
    m(2 * mode_j + 1, 2 * mode_i + 1) = sz ? -value : value;
}

void check_physical(const CovarianceMatrix &gamma) {
    if (!gausinfo::symplectic_eigenvalues(gamma).physical()) {
        throw physicality_error("assembled covariance matrix violates the uncertainty principle");
    }
}

}  // namespace

ElementsResult elements_with_probability(const ProtocolParams &params, const SubtractionMode &mode,
                                         int threads) {
    params.validate();
    mode.validate();

    if (mode.variant == SubtractionMode::Variant::none) {
        return {baseline_elements(params), 1.0};
    }

    const auto weights = detail::mode_weights(params, mode);
    const detail::RawSums sums = detail::accumulate_sums(params, weights, threads, /*p_only=*/false);
    if (!(sums.p > 0)) {
        throw postselection_error("subtraction event '" + mode.label() +
                                  "' has vanishing probability for these parameters");
    }

    ElementsResult out;
    out.post_select_prob = sums.p;
    CovarianceElements &e = out.elements;
    e.V_A = 1.0 + 2.0 * sums.num_a / sums.p;
    e.V_B2 = 1.0 + 2.0 * sums.num_b2 / sums.p;
    e.V_E = 1.0 + 2.0 * sums.num_e / sums.p;
    e.V_F = 1.0 + 2.0 * sums.num_f / sums.p;
    e.C_AB2 = 2.0 * sums.cr_ab2 / sums.p;
    e.C_EF = 2.0 * sums.cr_ef / sums.p;
    e.C_EB2 = 2.0 * sums.cr_eb2 / sums.p;
    e.C_FB2 = 2.0 * sums.cr_fb2 / sums.p;

    if (params.det_eff_placement == DetEffPlacement::homodyne && params.det_eff < 1.0) {
        apply_homodyne_loss(e, params.det_eff);
    }
    e.validate();
    return out;
}

CovarianceElements elements(const ProtocolParams &params, const SubtractionMode &mode, int threads) {
    return elements_with_probability(params, mode, threads).elements;
}

CovarianceElements baseline_elements(const ProtocolParams &params) {
    params.validate();
    const double T = params.channel_T;
    const double va = 2.0 * params.alpha_sq + 1.0;
    const double vb = 2.0 * params.beta_sq + 1.0;
    const double ca = 2.0 * std::sqrt(params.alpha_sq * (params.alpha_sq + 1.0));
    const double cb = 2.0 * std::sqrt(params.beta_sq * (params.beta_sq + 1.0));

    // Channel splitter: B2 = sqrt(T) B0 + sqrt(1-T) E0, E = sqrt(T) E0 - sqrt(1-T) B0.
    CovarianceElements e;
    e.V_A = va;
    e.V_B2 = T * va + (1.0 - T) * vb;
    e.V_E = (1.0 - T) * va + T * vb;
    e.V_F = vb;
    e.C_AB2 = std::sqrt(T) * ca;
    e.C_EF = std::sqrt(T) * cb;
    e.C_EB2 = std::sqrt(T * (1.0 - T)) * (vb - va);
    e.C_FB2 = std::sqrt(1.0 - T) * cb;
    e.validate();
    return e;
}

CovarianceMatrix assemble_gamma_efb2(const CovarianceElements &elements) {
    elements.validate();
    CovarianceMatrix gamma;
    gamma.mode_order = {"E", "F", "B2"};
    gamma.entries = Eigen::MatrixXd::Zero(6, 6);
    fill_block(gamma.entries, 0, 0, elements.V_E, false);
    fill_block(gamma.entries, 1, 1, elements.V_F, false);
    fill_block(gamma.entries, 2, 2, elements.V_B2, false);
    fill_block(gamma.entries, 0, 1, elements.C_EF, true);
    fill_block(gamma.entries, 0, 2, elements.C_EB2, false);
    fill_block(gamma.entries, 1, 2, elements.C_FB2, true);
    check_physical(gamma);
    return gamma;
}

CovarianceMatrix assemble_gamma_ab2(const CovarianceElements &elements) {
    elements.validate();
    CovarianceMatrix gamma;
    gamma.mode_order = {"A", "B2"};
    gamma.entries = Eigen::MatrixXd::Zero(4, 4);
    fill_block(gamma.entries, 0, 0, elements.V_A, false);
    fill_block(gamma.entries, 1, 1, elements.V_B2, false);
    fill_block(gamma.entries, 0, 1, elements.C_AB2, true);
    check_physical(gamma);
    return gamma;
}

}  // namespace psqkd::covariance
