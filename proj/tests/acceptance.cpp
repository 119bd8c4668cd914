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

// Acceptance gate for the library: one line per criterion, PASS/FAIL, and a
// final tally. Exits 0 only if every criterion passes.
//
// The distance-scan criteria honour PSQKD_ACCEPT_NMAX (default 30, clamped
// to [8, 64]); shallow truncations get a smaller time budget. The default
// is 30 because near the end of the secure range the detector-vs-counter
// rate difference is ~1e-10 while each rate carries ~1e-8 of truncation
// error at n_max = 20, so the measured ordering there is truncation noise.
//
// KNOWN RED: criterion 3 asserts the threshold-detector curve dominates the
// exact-counter curve at every distance where both rates are positive. That
// is genuinely false in the last ~3 km of the ~108 km secure range: the gap
// converges (stable for n_max 36..50, dense-alpha-grid optima, and eta = 1)
// to -1.4e-11 at 106 km, -5.5e-11 at 107 km, -7.8e-11 at 108 km. The cause
// is the threshold detector's click-conditioned state: it mixes in s >= 2
// tap outcomes whose own optimized rates are essentially zero at the tail
// (counter:2 at 106 km peaks at ~7e-12 vs counter:1's ~3e-7), and the
// Gaussian description of that covariance mixture costs more than the extra
// post-selection probability gains. Everywhere else (0..105 km) the
// detector dominates as asserted. The assertion is kept strict rather than
// widened to absorb a real effect, so this criterion reports FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psqkd/cli_app.hpp"
#include "psqkd/coeffs.hpp"
#include "psqkd/covariance.hpp"
#include "psqkd/gausinfo.hpp"
#include "psqkd/optimize.hpp"
#include "psqkd/oracle.hpp"
#include "psqkd/protocol.hpp"

using namespace psqkd;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

/// Every parameter/mode combination whose covariance the criteria below
/// report on; the physicality criterion replays them all.
struct OperatingPoint {
    ProtocolParams params;
    SubtractionMode mode;
};
std::vector<OperatingPoint> g_points;

void record(const ProtocolParams &params, const SubtractionMode &mode) {
    g_points.push_back({params, mode});
}

int env_nmax() {
    const char *text = std::getenv("PSQKD_ACCEPT_NMAX");
    if (text == nullptr || *text == '\0') {
        return 30;
    }
    char *end = nullptr;
    const long value = std::strtol(text, &end, 10);
    if (end == text || *end != '\0') {
        return 30;
    }
    return static_cast<int>(std::clamp(value, 8L, 64L));
}

/// q-q entries of the 8x8 oracle covariance over modes ordered (A, B, E, F).
CovarianceElements elements_from_gamma(const Eigen::MatrixXd &g) {
    CovarianceElements e;
    e.V_A = g(0, 0);
    e.V_B2 = g(2, 2);
    e.V_E = g(4, 4);
    e.V_F = g(6, 6);
    e.C_AB2 = g(0, 2);
    e.C_EF = g(4, 6);
    e.C_EB2 = g(4, 2);
    e.C_FB2 = g(6, 2);
    return e;
}

std::vector<oracle::Branch> tap_branches(const oracle::FockState &joint, const SubtractionMode &mode,
                                         double eta, double *prob_out) {
    if (mode.variant == SubtractionMode::Variant::counter) {
        if (eta >= 1.0) {
            auto [state, prob] = oracle::postselect_exact(joint, "C", mode.photons);
            *prob_out = prob;
            return {{1.0, std::move(state)}};
        }
        auto [branches, prob] = oracle::postselect_counter_thinned(joint, "C", mode.photons, eta);
        *prob_out = prob;
        return branches;
    }
    if (eta >= 1.0) {
        auto [branches, prob] = oracle::postselect_threshold(joint, "C");
        *prob_out = prob;
        return branches;
    }
    auto [branches, prob] = oracle::postselect_threshold_thinned(joint, "C", eta);
    *prob_out = prob;
    return branches;
}

double max_element_error(const CovarianceElements &got, const CovarianceElements &want) {
    double worst = 0.0;
    worst = std::max(worst, rel_err(got.V_A, want.V_A));
    worst = std::max(worst, rel_err(got.V_B2, want.V_B2));
    worst = std::max(worst, rel_err(got.V_E, want.V_E));
    worst = std::max(worst, rel_err(got.V_F, want.V_F));
    worst = std::max(worst, rel_err(got.C_AB2, want.C_AB2));
    worst = std::max(worst, rel_err(got.C_EF, want.C_EF));
    worst = std::max(worst, rel_err(got.C_EB2, want.C_EB2));
    worst = std::max(worst, rel_err(got.C_FB2, want.C_FB2));
    return worst;
}

// --- criterion 1: subtraction covariance, closed form vs brute force -------

bool criterion_equivalence() {
    const auto t0 = clk::now();
    constexpr double kTol = 1e-9;
    struct Probe {
        double alpha_sq, beta_sq, channel_T;
    };
    const Probe probes[] = {{0.2, 0.0, 0.3}, {0.5, 0.001, 0.5}, {1.0, 0.01, 0.9}};
    const SubtractionMode modes[] = {SubtractionMode::counter(1), SubtractionMode::counter(2),
                                     SubtractionMode::detector()};
    const double etas[] = {1.0, 0.68};

    double worst = 0.0;
    int cases = 0;
    for (const Probe &probe : probes) {
        ProtocolParams base;
        base.alpha_sq = probe.alpha_sq;
        base.beta_sq = probe.beta_sq;
        base.channel_T = probe.channel_T;
        base.tap_T1 = 0.9;
        base.trunc.n_max = 8;
        base.det_eff_placement = DetEffPlacement::subtraction_tap;
        const oracle::FockState joint = oracle::build_joint_state(base);
        for (const SubtractionMode &mode : modes) {
            for (const double eta : etas) {
                ProtocolParams p = base;
                p.det_eff = eta;
                const auto closed = covariance::elements_with_probability(p, mode);
                double oracle_prob = 0.0;
                const auto branches = tap_branches(joint, mode, eta, &oracle_prob);
                const auto cov = oracle::covariance_from_branches(branches, {"A", "B", "E", "F"});
                worst = std::max(worst, rel_err(closed.post_select_prob, oracle_prob));
                worst = std::max(worst,
                                 max_element_error(closed.elements, elements_from_gamma(cov.entries)));
                record(p, mode);
                ++cases;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst <= kTol && elapsed <= 60.0;
    std::printf("[1/8] subtraction covariance, closed form vs brute force: %d cases, max rel err "
                "%.3e (tol 1e-09), %.1f s (limit 60)  %s\n",
                cases, worst, elapsed, ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 2: conventional baseline --------------------------------------

bool criterion_baseline() {
    // Literal thermal-loss expressions at a generic parameter point.
    ProtocolParams p;
    p.alpha_sq = 0.33;
    p.beta_sq = 0.007;
    p.channel_T = 0.42;
    const CovarianceElements e = covariance::baseline_elements(p);
    const double va = 2.0 * p.alpha_sq + 1.0;
    const double vb = 2.0 * p.beta_sq + 1.0;
    const double T = p.channel_T;
    CovarianceElements want;
    want.V_A = va;
    want.V_B2 = T * va + (1.0 - T) * vb;
    want.V_E = (1.0 - T) * va + T * vb;
    want.V_F = vb;
    want.C_AB2 = 2.0 * std::sqrt(T * p.alpha_sq * (p.alpha_sq + 1.0));
    want.C_EF = 2.0 * std::sqrt(T * p.beta_sq * (p.beta_sq + 1.0));
    want.C_EB2 = std::sqrt(T * (1.0 - T)) * (vb - va);
    want.C_FB2 = std::sqrt(1.0 - T) * 2.0 * std::sqrt(p.beta_sq * (p.beta_sq + 1.0));
    const double analytic_err = max_element_error(e, want);
    record(p, SubtractionMode::none());

    // Brute-force comparison at small mean photon numbers and a deep cutoff,
    // where the oracle's truncation tail sits far below the tolerance.
    ProtocolParams po;
    po.alpha_sq = 0.1;
    po.beta_sq = 0.005;
    po.channel_T = 0.55;
    po.trunc.n_max = 24;
    const auto cov = oracle::covariance_from_state(oracle::build_channel_state(po),
                                                   {"A", "B", "E", "F"});
    const double oracle_err =
        max_element_error(covariance::baseline_elements(po), elements_from_gamma(cov.entries));
    record(po, SubtractionMode::none());

    // Lossless noiseless line with ideal reconciliation at unit mean photon
    // number: the rate collapses to log2(3) and the adversary learns nothing.
    ProtocolParams anchor;
    anchor.alpha_sq = 1.0;
    anchor.beta_sq = 0.0;
    anchor.channel_T = 1.0;
    anchor.recon_eff = 1.0;
    const KeyRateResult r = protocol::key_rate(anchor, SubtractionMode::none());
    const double k_err = std::abs(r.key_rate - std::log2(3.0));
    const double chi_err = std::abs(r.holevo);
    record(anchor, SubtractionMode::none());

    const bool ok = analytic_err <= 1e-9 && oracle_err <= 1e-9 && k_err <= 1e-9 && chi_err <= 1e-9;
    std::printf("[2/8] conventional baseline: analytic %.3e, oracle %.3e, anchor |K-log2(3)| %.3e, "
                "|chi| %.3e (tol 1e-09)  %s\n",
                analytic_err, oracle_err, k_err, chi_err, ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 3: optimized rate vs distance ---------------------------------

bool criterion_rate_curves(int n_env) {
    const auto t0 = clk::now();
    ProtocolParams p;
    p.trunc.n_max = n_env;
    const double d_max = optimize::max_distance(p, SubtractionMode::detector(), 0.2);
    const int top = static_cast<int>(std::floor(d_max));

    const SubtractionMode cnt = SubtractionMode::counter(1);
    const SubtractionMode det = SubtractionMode::detector();
    std::vector<double> k_cnt, k_det;
    for (int d = 0; d <= top; ++d) {
        const auto opt_cnt = optimize::optimize_alpha(p, cnt, d, 0.2);
        const auto opt_det = optimize::optimize_alpha(p, det, d, 0.2);
        // Evaluate both variants over the shared candidate set, so the
        // comparison of the two optimized curves carries no noise from the
        // two searches converging to slightly different points.
        ProtocolParams at = p;
        at.channel_T = protocol::distance_to_transmittance(d, 0.2);
        double best_cnt = -std::numeric_limits<double>::infinity();
        double best_det = best_cnt;
        for (const double alpha_sq : {opt_cnt.best_alpha_sq, opt_det.best_alpha_sq}) {
            at.alpha_sq = alpha_sq;
            best_cnt = std::max(best_cnt, protocol::key_rate(at, cnt).key_rate);
            best_det = std::max(best_det, protocol::key_rate(at, det).key_rate);
            record(at, cnt);
            record(at, det);
        }
        k_cnt.push_back(best_cnt);
        k_det.push_back(best_det);
    }

    double worst_gap = std::numeric_limits<double>::infinity();
    int worst_d = -1;
    int compared = 0;
    int violations = 0;
    for (int d = 0; d <= top; ++d) {
        if (k_det[d] > 0.0 && k_cnt[d] > 0.0) {
            const double gap = k_det[d] - k_cnt[d];
            if (gap < worst_gap) {
                worst_gap = gap;
                worst_d = d;
            }
            if (gap < -1e-12) ++violations;
            ++compared;
        }
    }
    bool decreasing = true;
    for (int d = 1; d <= top; ++d) {
        decreasing = decreasing && k_cnt[d] < k_cnt[d - 1] && k_det[d] < k_det[d - 1];
    }
    const double elapsed = seconds_since(t0);
    const double budget = n_env <= 20 ? 60.0 : 600.0;
    // The -1e-12 floor absorbs roundoff only. The counter curve genuinely
    // overtakes the detector curve by ~1e-11..8e-11 in the last ~3 km (see
    // the file header), so at n_max >= 30 this criterion is expected to
    // report FAIL on those trailing points.
    const bool ok = compared > 0 && worst_gap >= -1e-12 && decreasing && elapsed <= budget;
    std::printf("[3/8] optimized rate vs distance (n_max=%d, 0..%d km): detector-counter gap >= "
                "%.3e (at %d km, %d/%d points below -1e-12), strictly decreasing %s, %.1f s "
                "(limit %.0f)  %s\n",
                n_env, top, worst_gap, worst_d, violations, compared, decreasing ? "yes" : "NO",
                elapsed, budget, ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 4: maximum secure distance ------------------------------------

bool criterion_max_distance() {
    ProtocolParams p;
    double d_det[2];
    double d_none[2];
    const int depths[2] = {20, 30};
    for (int i = 0; i < 2; ++i) {
        p.trunc.n_max = depths[i];
        d_det[i] = optimize::max_distance(p, SubtractionMode::detector(), 0.2);
        d_none[i] = optimize::max_distance(p, SubtractionMode::none(), 0.2);
    }
    for (int i = 0; i < 2; ++i) {
        p.trunc.n_max = depths[i];
        for (const SubtractionMode &mode : {SubtractionMode::detector(), SubtractionMode::none()}) {
            const double d_ref = mode.variant == SubtractionMode::Variant::none ? d_none[i] : d_det[i];
            const double d_at = std::max(0.0, d_ref - 1.0);
            const auto opt = optimize::optimize_alpha(p, mode, d_at, 0.2);
            ProtocolParams at = p;
            at.channel_T = protocol::distance_to_transmittance(d_at, 0.2);
            at.alpha_sq = opt.best_alpha_sq;
            record(at, mode);
        }
    }
    const bool extends = d_det[0] > d_none[0] && d_det[1] > d_none[1];
    const bool stable =
        std::abs(d_det[0] - d_det[1]) <= 0.1 && std::abs(d_none[0] - d_none[1]) <= 0.1;
    const bool ok = extends && stable;
    std::printf("[4/8] maximum secure distance: subtraction %.2f/%.2f km vs conventional %.2f/%.2f "
                "km (n_max 20/30), extension %s, stability |d20-d30| %.3f/%.3f km (tol 0.1)  %s\n",
                d_det[0], d_det[1], d_none[0], d_none[1], extends ? "yes" : "NO",
                std::abs(d_det[0] - d_det[1]), std::abs(d_none[0] - d_none[1]),
                ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 5: channel-noise sweep ----------------------------------------

bool criterion_noise_sweep(int n_env) {
    const double betas[] = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    double d_none[5];
    double d_det[5];
    for (int i = 0; i < 5; ++i) {
        ProtocolParams p;
        p.beta_sq = betas[i];
        p.trunc.n_max = n_env;
        d_none[i] = optimize::max_distance(p, SubtractionMode::none(), 0.2);
        d_det[i] = optimize::max_distance(p, SubtractionMode::detector(), 0.2);
        for (const SubtractionMode &mode : {SubtractionMode::none(), SubtractionMode::detector()}) {
            const double d_ref = mode.variant == SubtractionMode::Variant::none ? d_none[i] : d_det[i];
            const auto opt = optimize::optimize_alpha(p, mode, std::max(0.0, d_ref - 1.0), 0.2);
            ProtocolParams at = p;
            at.channel_T = protocol::distance_to_transmittance(std::max(0.0, d_ref - 1.0), 0.2);
            at.alpha_sq = opt.best_alpha_sq;
            record(at, mode);
        }
    }
    // The 0.011 km slack absorbs the bisection quantization of the distance
    // search (bracket width 0.01 km); the advantage-gap slack is 0.05 km.
    bool distances_monotone = true;
    bool gap_monotone = true;
    std::printf("[5/8] channel-noise sweep:");
    for (int i = 0; i < 5; ++i) {
        std::printf(" b2=%.0e none %.2f det %.2f gap %.2f;", betas[i], d_none[i], d_det[i],
                    d_det[i] - d_none[i]);
        if (i > 0) {
            distances_monotone = distances_monotone && d_none[i] <= d_none[i - 1] + 0.011 &&
                                 d_det[i] <= d_det[i - 1] + 0.011;
            gap_monotone = gap_monotone &&
                           (d_det[i] - d_none[i]) <= (d_det[i - 1] - d_none[i - 1]) + 0.05;
        }
    }
    const bool ok = distances_monotone && gap_monotone;
    std::printf(" monotone %s, gap monotone %s  %s\n", distances_monotone ? "yes" : "NO",
                gap_monotone ? "yes" : "NO", ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 6: Gaussian-surrogate dominance --------------------------------

bool criterion_dominance() {
    constexpr double kFloor = -1e-9;
    std::mt19937_64 gen(20260819);
    std::uniform_real_distribution<double> draw_alpha(0.1, 1.0);
    std::uniform_real_distribution<double> draw_beta(0.0, 0.01);
    std::uniform_real_distribution<double> draw_t(0.3, 0.9);
    std::uniform_real_distribution<double> draw_t1(0.75, 0.95);
    const SubtractionMode modes[3] = {SubtractionMode::counter(1), SubtractionMode::detector(),
                                      SubtractionMode::counter(2)};

    double min_entropy_slack = std::numeric_limits<double>::infinity();
    double min_holevo_slack = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 10; ++d) {
        ProtocolParams p;
        p.alpha_sq = draw_alpha(gen);
        p.beta_sq = draw_beta(gen);
        p.channel_T = draw_t(gen);
        p.tap_T1 = draw_t1(gen);
        p.det_eff = 1.0;
        p.trunc.n_max = 8;
        const SubtractionMode mode = modes[d % 3];

        const oracle::FockState joint = oracle::build_joint_state(p);
        double prob = 0.0;
        const auto branches = tap_branches(joint, mode, 1.0, &prob);
        const double s_exact = oracle::entropy_exact(oracle::reduce(branches, {"E", "F"}));
        const double s_gauss =
            gausinfo::gaussian_entropy(oracle::covariance_from_branches(branches, {"E", "F"}));
        const double chi_exact = oracle::exact_holevo_homodyne(branches, "B", {"E", "F"});
        const auto closed = covariance::elements_with_probability(p, mode);
        // The surrogate hands the adversary a purification of the Gaussian
        // state with the sender/receiver covariance, so it conditions that
        // two-mode matrix rather than reading the environment marginal.
        const double chi_gauss =
            gausinfo::holevo_information(covariance::assemble_gamma_ab2(closed.elements));
        min_entropy_slack = std::min(min_entropy_slack, s_gauss - s_exact);
        min_holevo_slack = std::min(min_holevo_slack, chi_gauss - chi_exact);
        record(p, mode);
    }
    const bool ok = min_entropy_slack >= kFloor && min_holevo_slack >= kFloor;
    std::printf("[6/8] Gaussian-surrogate dominance (10 seeded draws): min entropy slack %.3e, min "
                "holevo slack %.3e (floor -1e-09)  %s\n",
                min_entropy_slack, min_holevo_slack, ok ? "PASS" : "FAIL");
    return ok;
}

// --- criterion 7: physicality of every reported covariance --------------------

bool criterion_physicality() {
    double min_nu = std::numeric_limits<double>::infinity();
    std::size_t matrices = 0;
    std::string failure;
    for (const OperatingPoint &pt : g_points) {
        try {
            const CovarianceElements e = pt.mode.variant == SubtractionMode::Variant::none
                                             ? covariance::baseline_elements(pt.params)
                                             : covariance::elements(pt.params, pt.mode);
            for (const CovarianceMatrix &gamma :
                 {covariance::assemble_gamma_efb2(e), covariance::assemble_gamma_ab2(e)}) {
                const auto spectrum = gausinfo::symplectic_eigenvalues(gamma);
                for (const double nu : spectrum.values) {
                    min_nu = std::min(min_nu, nu);
                }
                ++matrices;
            }
        } catch (const std::exception &ex) {
            failure = ex.what();
            break;
        }
    }
    const bool ok = failure.empty() && min_nu >= 1.0 - 1e-8;
    if (failure.empty()) {
        std::printf("[7/8] physicality sweep: %zu matrices from %zu operating points, min "
                    "symplectic eigenvalue %.12f (floor 1 - 1e-08)  %s\n",
                    matrices, g_points.size(), min_nu, ok ? "PASS" : "FAIL");
    } else {
        std::printf("[7/8] physicality sweep: rejected after %zu matrices: %s  FAIL\n", matrices,
                    failure.c_str());
    }
    return ok;
}

// --- criterion 8: invariant suite ---------------------------------------------

bool invariant_row_norms() {
    for (const double T : {0.3, 0.5, 0.9}) {
        for (int n = 0; n <= 30; ++n) {
            double sum = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double c = coeffs::bs_coeff(T, n, k);
                sum += c * c;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                return false;
            }
        }
    }
    return true;
}

bool invariant_mixture() {
    ProtocolParams p;
    p.alpha_sq = 0.4;
    p.beta_sq = 0.01;
    p.channel_T = 0.5;
    p.tap_T1 = 0.85;
    p.det_eff = 1.0;
    p.trunc.n_max = 6;
    const auto det = covariance::elements_with_probability(p, SubtractionMode::detector());
    double prob_sum = 0.0;
    double mix_va = 0.0;
    double mix_cab = 0.0;
    for (int s = 1; s <= 2 * p.trunc.n_max; ++s) {
        const double ps = coeffs::tap_count_probability(p, s);
        if (ps <= 1e-15) {
            continue;
        }
        const CovarianceElements es = covariance::elements(p, SubtractionMode::counter(s));
        prob_sum += ps;
        mix_va += ps * es.V_A;
        mix_cab += ps * es.C_AB2;
    }
    return rel_err(det.post_select_prob, prob_sum) < 1e-10 &&
           rel_err(det.elements.V_A, mix_va / prob_sum) < 1e-10 &&
           rel_err(det.elements.C_AB2, mix_cab / prob_sum) < 1e-10;
}

bool invariant_quadrature_symmetry() {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.01;
    p.channel_T = 0.5;
    p.tap_T1 = 0.9;
    p.trunc.n_max = 6;
    const auto [st, prob] = oracle::postselect_exact(oracle::build_joint_state(p), "C", 1);
    const auto g = oracle::covariance_from_state(st, {"A", "B"});
    return std::abs(g.entries(0, 0) - g.entries(1, 1)) < 1e-12 &&
           std::abs(g.entries(2, 2) - g.entries(3, 3)) < 1e-12 &&
           std::abs(g.entries(0, 1)) < 1e-12 && std::abs(g.entries(0, 3)) < 1e-12 &&
           std::abs(g.entries(0, 2) + g.entries(1, 3)) < 1e-12;
}

bool invariant_rate_identity() {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.001;
    p.channel_T = 0.5;
    p.det_eff = 1.0;
    p.trunc.n_max = 8;
    for (const SubtractionMode &mode :
         {SubtractionMode::none(), SubtractionMode::counter(1), SubtractionMode::detector()}) {
        const KeyRateResult r = protocol::key_rate(p, mode);
        if (std::abs(r.key_rate - r.post_select_prob * (p.recon_eff * r.mutual_info - r.holevo)) >
            1e-12) {
            return false;
        }
    }
    return true;
}

int run_cli(const std::vector<std::string> &args) {
    std::vector<const char *> argv;
    argv.push_back("psqkd");
    for (const std::string &a : args) {
        argv.push_back(a.c_str());
    }
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

bool invariant_csv_and_parallel_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "psqkd_acceptance";
    fs::create_directories(dir);
    const fs::path cfg = dir / "sweep.cfg";
    {
        std::ofstream out(cfg);
        out << "alpha_sq = 0.5\nbeta_sq = 0.001\ntap_T1 = 0.9\ndet_eff = 1.0\nn_max = 8\n"
               "variant = counter:1\n";
    }
    const fs::path csv1 = dir / "sweep1.csv";
    const fs::path csv3 = dir / "sweep3.csv";
    if (run_cli({"sweep", "--config", cfg.string(), "--distances", "0:10:5", "--jobs", "1", "--out",
                 csv1.string()}) != 0) {
        return false;
    }
    if (run_cli({"sweep", "--config", cfg.string(), "--distances", "0:10:5", "--jobs", "3", "--out",
                 csv3.string()}) != 0) {
        return false;
    }
    const auto slurp = [](const fs::path &path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string text1 = slurp(csv1);
    if (text1 != slurp(csv3) || text1.empty()) {
        return false;
    }

    // Every numeric CSV cell scans back to the identical double.
    std::istringstream lines(text1);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            char *end = nullptr;
            const double value = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size()) {
                continue;  // the variant label
            }
            if (cli::format_double(value) != cell) {
                return false;
            }
        }
    }

    // Library-level determinism across worker counts, compared bitwise.
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.001;
    p.channel_T = 0.5;
    p.det_eff = 0.68;
    p.trunc.n_max = 10;
    const auto one = covariance::elements_with_probability(p, SubtractionMode::detector(), 1);
    const auto three = covariance::elements_with_probability(p, SubtractionMode::detector(), 3);
    return one.post_select_prob == three.post_select_prob && one.elements.V_A == three.elements.V_A &&
           one.elements.V_B2 == three.elements.V_B2 && one.elements.V_E == three.elements.V_E &&
           one.elements.V_F == three.elements.V_F && one.elements.C_AB2 == three.elements.C_AB2 &&
           one.elements.C_EF == three.elements.C_EF && one.elements.C_EB2 == three.elements.C_EB2 &&
           one.elements.C_FB2 == three.elements.C_FB2;
}

bool criterion_invariants() {
    const bool norms = invariant_row_norms();
    const bool mixture = invariant_mixture();
    const bool quadrature = invariant_quadrature_symmetry();
    const bool identity = invariant_rate_identity();
    const bool csv = invariant_csv_and_parallel_determinism();
    const bool ok = norms && mixture && quadrature && identity && csv;
    std::printf("[8/8] invariant suite: splitter row norms %s, count-mixture consistency %s, "
                "quadrature symmetry %s, rate identity %s, csv round-trip + parallel determinism "
                "%s  %s\n",
                norms ? "ok" : "NO", mixture ? "ok" : "NO", quadrature ? "ok" : "NO",
                identity ? "ok" : "NO", csv ? "ok" : "NO", ok ? "PASS" : "FAIL");
    return ok;
}

}  // namespace

int main() {
    const int n_env = env_nmax();
    std::printf("acceptance gate (distance scans at n_max=%d; set PSQKD_ACCEPT_NMAX to change)\n",
                n_env);
    int passed = 0;
    bool results[8] = {};
    results[0] = criterion_equivalence();
    results[1] = criterion_baseline();
    results[2] = criterion_rate_curves(n_env);
    results[3] = criterion_max_distance();
    results[4] = criterion_noise_sweep(n_env);
    results[5] = criterion_dominance();
    results[6] = criterion_physicality();
    results[7] = criterion_invariants();
    for (const bool r : results) {
        passed += r ? 1 : 0;
    }
    std::printf("ACCEPTANCE: %d/8 PASS\n", passed);
    return passed == 8 ? 0 : 1;
}
