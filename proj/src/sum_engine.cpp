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

#include "sum_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

#include "psqkd/coeffs.hpp"

namespace psqkd::detail {

namespace {

/// Lower-triangular table of sqrt(C(n, k)) for n = 0 .. n_top.
std::vector<std::vector<double>> sqrt_choose_table(int n_top) {
    std::vector<std::vector<double>> c(n_top + 1);
    std::vector<double> lgf(n_top + 2);
    lgf[0] = 0.0;
    for (int i = 1; i <= n_top + 1; ++i) {
        lgf[i] = lgf[i - 1] + std::log(static_cast<double>(i));
    }
    for (int n = 0; n <= n_top; ++n) {
        c[n].resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            c[n][k] = std::exp(0.5 * (lgf[n] - lgf[k] - lgf[n - k]));
        }
    }
    return c;
}

/// Lower-triangular table of the beam-splitter amplitudes
/// sqrt(C(n, k)) T^((n-k)/2) (1-T)^(k/2) for n = 0 .. n_top.
std::vector<std::vector<double>> bs_table(double T, int n_top,
                                          const std::vector<std::vector<double>> &sqrt_choose) {
    std::vector<std::vector<double>> g(n_top + 1);
    for (int n = 0; n <= n_top; ++n) {
        g[n].resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            g[n][k] = sqrt_choose[n][k] * std::pow(T, 0.5 * (n - k)) * std::pow(1.0 - T, 0.5 * k);
        }
    }
    return g;
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

bool thinning_active(const ProtocolParams &params) {
    return params.det_eff_placement == DetEffPlacement::subtraction_tap && params.det_eff < 1.0;
}

/// Probability that a lossy counter with efficiency eta announces `seen` of
/// `arrived` photons: C(arrived, seen) eta^seen (1 - eta)^(arrived - seen).
double thinned_weight(int arrived, int seen, double eta) {
    return std::exp(log_choose(arrived, seen) + seen * std::log(eta) +
                    (arrived - seen) * std::log1p(-eta));
}

}  // namespace

std::vector<double> mode_weights(const ProtocolParams &params, const SubtractionMode &mode) {
    const int s_top = 2 * params.trunc.n_max;
    std::vector<double> w(s_top + 1, 0.0);
    const bool thin = thinning_active(params);
    switch (mode.variant) {
        case SubtractionMode::Variant::counter:
            if (thin) {
                for (int s = mode.photons; s <= s_top; ++s) {
                    w[s] = thinned_weight(s, mode.photons, params.det_eff);
                }
            } else if (mode.photons <= s_top) {
                w[mode.photons] = 1.0;
            }
            break;
        case SubtractionMode::Variant::detector:
            for (int s = 1; s <= s_top; ++s) {
                // Click probability 1 - (1 - eta)^s, exactly 1 when ideal.
                w[s] = thin ? -std::expm1(s * std::log1p(-params.det_eff)) : 1.0;
            }
            break;
        case SubtractionMode::Variant::none:
            throw std::logic_error("the interference sums are undefined for variant none");
    }
    return w;
}

std::vector<double> exact_count_weights(const ProtocolParams &params, int count) {
    const int s_top = 2 * params.trunc.n_max;
    std::vector<double> w(s_top + 1, 0.0);
    if (thinning_active(params)) {
        for (int s = count; s <= s_top; ++s) {
            w[s] = thinned_weight(s, count, params.det_eff);
        }
    } else if (count <= s_top) {
        w[count] = 1.0;
    }
    return w;
}

RawSums accumulate_sums(const ProtocolParams &params, const std::vector<double> &weights, int threads,
                        bool p_only) {
    const int n_cap = params.trunc.n_max;
    const int b_top = 2 * n_cap;  // most photons the tapped mode can carry
    if (static_cast<int>(weights.size()) != b_top + 1) {
        throw std::invalid_argument("weight vector must have 2 * n_max + 1 entries");
    }

    // Amplitude tables. Index conventions: gT[n][k] routes k of n photons
    // into the exchange arm of the channel splitter; gT1[b][s] reflects s of
    // b photons at the tap; sqrtC[n][k] = sqrt(C(n, k)).
    const auto sqrtC = sqrt_choose_table(b_top + 1);
    const auto gT = bs_table(params.channel_T, n_cap + 1, sqrtC);
    const auto gT1 = bs_table(params.tap_T1, b_top + 1, sqrtC);

    std::vector<double> sqt(b_top + 2);
    for (int i = 0; i <= b_top + 1; ++i) {
        sqt[i] = std::sqrt(static_cast<double>(i));
    }

    // Source amplitudes: A2/B2 are squared, A1/B1 pair adjacent photon
    // numbers for the ladder sums. The top ladder rung (n_cap, n_cap + 1)
    // would reach outside the truncated space, so it is dropped: every
    // moment then describes exactly the state truncated at n_cap, which is
    // what the brute-force verification route builds. The omitted rung is
    // of the same order as the truncation tail itself.
    std::vector<double> A2(n_cap + 1), A1(n_cap + 1), Bb2(n_cap + 1), Bb1(n_cap + 1);
    for (int n = 0; n <= n_cap; ++n) {
        const double an = coeffs::tmsv_coeff(n, params.alpha_sq);
        const double bn = coeffs::tmsv_coeff(n, params.beta_sq);
        A2[n] = an * an;
        A1[n] = n < n_cap ? an * coeffs::tmsv_coeff(n + 1, params.alpha_sq) : 0.0;
        Bb2[n] = bn * bn;
        Bb1[n] = n < n_cap ? bn * coeffs::tmsv_coeff(n + 1, params.beta_sq) : 0.0;
    }

    // Detector weights folded into the tap amplitudes. For b photons
    // reaching the tap:
    //   W0(b)  = sum_s w(s) gT1[b][s]^2                      (diagonal sums)
    //   Wb2(b) = sum_s w(s) (b - s) gT1[b][s]^2              (Bob's photon number)
    //   Wab(b) = sum_s w(s) sqrt(b-s+1) gT1[b][s] gT1[b+1][s] (ladder pairings)
    std::vector<double> W0(b_top + 1, 0.0), Wb2(b_top + 1, 0.0), Wab(b_top + 1, 0.0);
    for (int b = 0; b <= b_top; ++b) {
        for (int s = 0; s <= b; ++s) {
            const double w = weights[s];
            if (w == 0.0) {
                continue;
            }
            const double amp = gT1[b][s];
            W0[b] += w * amp * amp;
            Wb2[b] += w * (b - s) * amp * amp;
            Wab[b] += w * sqt[b - s + 1] * amp * gT1[b + 1][s];
        }
    }

    // Ladder-shifted interference sum over the second index tuple. The shift
    // range merges the upward (j >= 0) and downward (j < 0) branches; both
    // binomial row indices below are invariant under j, so the rows are
    // hoisted.
    const auto jsum = [&gT, &sqrtC](int n2, int k2, int m2, int l2) -> double {
        const int j_lo = std::max(-k2, -l2);
        const int j_hi = std::min(n2 - k2, m2 - l2);
        const double *row_n = gT[n2].data();
        const double *row_m = gT[m2].data();
        const double *row_b = sqrtC[n2 - k2 + l2].data();
        const double *row_k = sqrtC[k2 + m2 - l2].data();
        double acc = 0.0;
        for (int j = j_lo; j <= j_hi; ++j) {
            const double term = row_n[k2 + j] * row_m[l2 + j] * row_b[l2 + j] * row_k[k2 + j];
            acc += (j & 1) ? -term : term;
        }
        return acc;
    };

    // One task per outer (n, k) pair. Task granularity is independent of the
    // thread count and partial sums are reduced in task order, which keeps
    // the floating-point result bit-identical for any `threads`.
    const int n_tasks = (n_cap + 1) * (n_cap + 2) / 2;
    std::vector<std::pair<int, int>> task_nk;
    task_nk.reserve(n_tasks);
    for (int n = 0; n <= n_cap; ++n) {
        for (int k = 0; k <= n; ++k) {
            task_nk.emplace_back(n, k);
        }
    }
    std::vector<RawSums> partials(n_tasks);

    const auto run_task = [&](int t) {
        const auto [n, k] = task_nk[t];
        RawSums out;
        const double gnk = gT[n][k];
        if (gnk == 0.0 || A2[n] == 0.0) {
            partials[t] = out;
            return;
        }
        for (int m = 0; m <= n_cap; ++m) {
            if (Bb2[m] == 0.0) {
                continue;
            }
            for (int l = 0; l <= m; ++l) {
                const int b = n - k + l;
                const double w0 = W0[b];
                const double wab = Wab[b];
                if (w0 == 0.0 && wab == 0.0) {
                    continue;
                }
                const double pre = gnk * gT[m][l] * sqrtC[b][l] * sqrtC[k + m - l][k];
                if (pre == 0.0) {
                    continue;
                }
                if (w0 != 0.0) {
                    const double base = A2[n] * Bb2[m] * pre * jsum(n, k, m, l);
                    out.p += base * w0;
                    if (!p_only) {
                        out.num_a += n * base * w0;
                        out.num_b2 += base * Wb2[b];
                        out.num_e += (k + m - l) * base * w0;
                        out.num_f += m * base * w0;
                        if (Bb1[m] != 0.0) {
                            out.cr_ef += A2[n] * Bb1[m] * pre * sqt[m + 1] * sqt[k + m - l + 1] * w0 *
                                         jsum(n, k, m + 1, l);
                        }
                    }
                }
                if (!p_only && wab != 0.0) {
                    if (A1[n] != 0.0) {
                        out.cr_ab2 += A1[n] * Bb2[m] * pre * sqt[n + 1] * wab * jsum(n + 1, k, m, l);
                    }
                    if (k + m - l > 0) {
                        out.cr_eb2 += A2[n] * Bb2[m] * pre * sqt[k + m - l] * wab * jsum(n, k, m, l + 1);
                    }
                    if (Bb1[m] != 0.0) {
                        out.cr_fb2 += A2[n] * Bb1[m] * pre * sqt[m + 1] * wab * jsum(n, k, m + 1, l + 1);
                    }
                }
            }
        }
        partials[t] = out;
    };

    const int n_workers = std::clamp(threads, 1, n_tasks);
    if (n_workers == 1) {
        for (int t = 0; t < n_tasks; ++t) {
            run_task(t);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i) {
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) {
                    run_task(t);
                }
            });
        }
        for (auto &worker : pool) {
            worker.join();
        }
    }

    RawSums total;
    for (const RawSums &part : partials) {
        total.p += part.p;
        total.num_a += part.num_a;
        total.num_b2 += part.num_b2;
        total.num_e += part.num_e;
        total.num_f += part.num_f;
        total.cr_ab2 += part.cr_ab2;
        total.cr_ef += part.cr_ef;
        total.cr_eb2 += part.cr_eb2;
        total.cr_fb2 += part.cr_fb2;
    }
    return total;
}

}  // namespace psqkd::detail
