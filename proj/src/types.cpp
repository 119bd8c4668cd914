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

#include "psqkd/types.hpp"

#include <cmath>
#include <sstream>

namespace psqkd {

double TruncationConfig::geometric_tail(double mean_photons) const {
    if (mean_photons <= 0) {
        return 0.0;
    }
    // Thermal tail: sum_{n > n_max} mu^n / (1 + mu)^(n + 1) = (mu / (1 + mu))^(n_max + 1).
    return std::pow(mean_photons / (1.0 + mean_photons), n_max + 1);
}

bool TruncationConfig::tail_ok(double mean_photons) const {
    return geometric_tail(mean_photons) <= tail_tolerance;
}

void TruncationConfig::validate() const {
    if (n_max < 1) {
        throw std::invalid_argument("truncation n_max must be at least 1, got " + std::to_string(n_max));
    }
    if (!(tail_tolerance > 0)) {
        throw std::invalid_argument("truncation tail_tolerance must be positive");
    }
}

void ProtocolParams::validate() const {
    auto require = [](bool ok, const std::string &msg) {
        if (!ok) {
            throw std::invalid_argument(msg);
        }
    };
    require(std::isfinite(alpha_sq) && alpha_sq >= 0, "alpha_sq must be finite and >= 0");
    require(std::isfinite(beta_sq) && beta_sq >= 0, "beta_sq must be finite and >= 0");
    require(std::isfinite(channel_T) && channel_T > 0 && channel_T <= 1, "channel_T must lie in (0, 1]");
    require(std::isfinite(tap_T1) && tap_T1 > 0 && tap_T1 <= 1, "tap_T1 must lie in (0, 1]");
    require(std::isfinite(recon_eff) && recon_eff > 0 && recon_eff <= 1, "recon_eff must lie in (0, 1]");
    require(std::isfinite(det_eff) && det_eff > 0 && det_eff <= 1, "det_eff must lie in (0, 1]");
    trunc.validate();
}

std::optional<std::string> ProtocolParams::tail_warning() const {
    std::ostringstream msg;
    bool bad = false;
    if (!trunc.tail_ok(alpha_sq)) {
        msg << "truncated source weight " << trunc.geometric_tail(alpha_sq) << " for alpha_sq=" << alpha_sq;
        bad = true;
    }
    if (!trunc.tail_ok(beta_sq)) {
        if (bad) {
            msg << "; ";
        }
        msg << "truncated noise weight " << trunc.geometric_tail(beta_sq) << " for beta_sq=" << beta_sq;
        bad = true;
    }
    if (!bad) {
        return std::nullopt;
    }
    msg << " exceeds tail_tolerance=" << trunc.tail_tolerance << " at n_max=" << trunc.n_max;
    return msg.str();
}

void SubtractionMode::validate() const {
    if (variant == Variant::counter && photons < 1) {
        throw std::invalid_argument("counter variant requires photons >= 1, got " + std::to_string(photons));
    }
}

std::string SubtractionMode::label() const {
    switch (variant) {
        case Variant::none:
            return "none";
        case Variant::counter:
            return "counter:" + std::to_string(photons);
        case Variant::detector:
            return "detector";
    }
    throw std::logic_error("unreachable subtraction variant");
}

SubtractionMode SubtractionMode::parse(const std::string &text) {
    if (text == "none") {
        return SubtractionMode::none();
    }
    if (text == "detector") {
        return SubtractionMode::detector();
    }
    if (text == "counter") {
        return SubtractionMode::counter(1);
    }
    const std::string prefix = "counter:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string digits = text.substr(prefix.size());
        if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
            SubtractionMode mode = SubtractionMode::counter(std::stoi(digits));
            mode.validate();
            return mode;
        }
    }
    throw std::invalid_argument("unrecognized subtraction variant '" + text +
                                "' (expected none, counter:S, or detector)");
}

void CovarianceElements::validate() const {
    auto check_variance = [](double v, const char *name) {
        // Variances sit at or above the vacuum value 1; allow roundoff slack.
        if (!std::isfinite(v) || v < 1.0 - 1e-9) {
            throw physicality_error(std::string(name) + " = " + std::to_string(v) +
                                    " is below the vacuum variance");
        }
    };
    check_variance(V_A, "V_A");
    check_variance(V_B2, "V_B2");
    check_variance(V_E, "V_E");
    check_variance(V_F, "V_F");
    auto check_corr = [](double c, double va, double vb, const char *name) {
        if (!std::isfinite(c) || c * c > va * vb * (1.0 + 1e-9)) {
            throw physicality_error(std::string(name) + " = " + std::to_string(c) +
                                    " violates the Cauchy-Schwarz bound");
        }
    };
    check_corr(C_AB2, V_A, V_B2, "C_AB2");
    check_corr(C_EF, V_E, V_F, "C_EF");
    check_corr(C_EB2, V_E, V_B2, "C_EB2");
    check_corr(C_FB2, V_F, V_B2, "C_FB2");
}

void CovarianceMatrix::validate_shape(double tol) const {
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(mode_order.size());
    if (entries.rows() != dim || entries.cols() != dim) {
        throw std::invalid_argument("covariance matrix must be " + std::to_string(dim) + "x" +
                                    std::to_string(dim) + " for " + std::to_string(mode_order.size()) +
                                    " modes");
    }
    const double scale = 1.0 + entries.cwiseAbs().maxCoeff();
    const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) {
        throw physicality_error("covariance matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
    }
}

}  // namespace psqkd
