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

#include "psqkd/optimize.hpp"

#include <cmath>
#include <limits>

#include "psqkd/protocol.hpp"

namespace psqkd::optimize {

namespace {

constexpr double kAlphaLo = 1e-2;
constexpr double kAlphaHi = 1e2;
constexpr int kGridPoints = 17;
constexpr double kRelTol = 1e-3;
constexpr double kGolden = 0.6180339887498949;  // 1/phi

constexpr double kCoarseStepKm = 5.0;
constexpr double kMaxScanKm = 500.0;
constexpr double kBracketKm = 0.01;

}  // namespace

OptResult optimize_alpha(const ProtocolParams &params, const SubtractionMode &mode, int threads) {
    params.validate();
    mode.validate();

    OptResult out;
    const auto eval = [&](double alpha_sq) -> double {
        ProtocolParams p = params;
        p.alpha_sq = alpha_sq;
        ++out.evaluations;
        try {
            return protocol::key_rate(p, mode, threads).key_rate;
        } catch (const physicality_error &) {
            return -std::numeric_limits<double>::infinity();
        } catch (const postselection_error &) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    // Coarse log-spaced grid.
    const double log_lo = std::log(kAlphaLo);
    const double log_hi = std::log(kAlphaHi);
    int best = 0;
    double best_rate = -std::numeric_limits<double>::infinity();
    std::vector<double> grid(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
        grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
        const double rate = eval(grid[i]);
        if (rate > best_rate) {
            best_rate = rate;
            best = i;
        }
    }

    // Golden-section refinement of the bracket around the best grid point,
    // in the log domain to match the grid spacing.
    double a = std::log(grid[std::max(0, best - 1)]);
    double b = std::log(grid[std::min(kGridPoints - 1, best + 1)]);
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = eval(std::exp(x1));
    double f2 = eval(std::exp(x2));
    while ((b - a) > kRelTol) {  // log-domain width == relative width
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = eval(std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = eval(std::exp(x1));
        }
    }
    const double mid = std::exp(0.5 * (a + b));
    const double f_mid = eval(mid);

    out.best_alpha_sq = mid;
    out.best_key_rate = f_mid;
    if (f1 > out.best_key_rate) {
        out.best_alpha_sq = std::exp(x1);
        out.best_key_rate = f1;
    }
    if (f2 > out.best_key_rate) {
        out.best_alpha_sq = std::exp(x2);
        out.best_key_rate = f2;
    }
    if (best_rate > out.best_key_rate) {
        out.best_alpha_sq = grid[best];
        out.best_key_rate = best_rate;
    }
    out.bracket_lo = std::exp(a);
    out.bracket_hi = std::exp(b);
    out.all_nonpositive = !(out.best_key_rate > 0);
    return out;
}

OptResult optimize_alpha(const ProtocolParams &params, const SubtractionMode &mode, double distance_km,
                         double loss_db_per_km, int threads) {
    ProtocolParams p = params;
    p.channel_T = protocol::distance_to_transmittance(distance_km, loss_db_per_km);
    return optimize_alpha(p, mode, threads);
}

double max_distance(const ProtocolParams &params, const SubtractionMode &mode, double loss_db_per_km,
                    int threads) {
    if (!(loss_db_per_km > 0)) {
        throw std::invalid_argument("fiber loss must be > 0 dB/km for a distance search");
    }

    const auto optimized_rate = [&](double d) -> double {
        ProtocolParams p = params;
        p.channel_T = protocol::distance_to_transmittance(d, loss_db_per_km);
        return optimize_alpha(p, mode, threads).best_key_rate;
    };

    if (!(optimized_rate(0.0) > 0)) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = kCoarseStepKm;
    while (optimized_rate(hi) > 0) {
        lo = hi;
        hi += kCoarseStepKm;
        if (hi > kMaxScanKm) {
            return kMaxScanKm;  // scan cap; the rate stayed positive throughout
        }
    }
    while (hi - lo > kBracketKm) {
        const double mid = 0.5 * (lo + hi);
        if (optimized_rate(mid) > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace psqkd::optimize
