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

#ifndef PSQKD_TYPES_HPP
#define PSQKD_TYPES_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace psqkd {

/// Thrown when a state or covariance matrix violates a physical constraint
/// (uncertainty principle, variance below vacuum, non-positive measured
/// variance). Distinct from std::invalid_argument so callers can map it to a
/// dedicated exit status.
class physicality_error : public std::runtime_error {
   public:
    explicit physicality_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Thrown when a post-selection event has zero (or numerically vanishing)
/// probability, e.g. demanding a click from a vacuum tap.
class postselection_error : public std::runtime_error {
   public:
    explicit postselection_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Photon-number cutoff for the truncated Fock-space sums.
///
/// Source modes are kept up to `n_max` photons; derived quantities inherit
/// cutoffs from photon-number conservation. The truncation error of a
/// two-mode squeezed vacuum with mean photon number mu decays geometrically,
/// with discarded weight (mu / (1 + mu))^(n_max + 1).
struct TruncationConfig {
    int n_max = 30;
    double tail_tolerance = 1e-3;

    /// Probability weight discarded by truncating a thermal photon-number
    /// distribution with the given mean at n_max.
    double geometric_tail(double mean_photons) const;

    /// True when the discarded weight is within tail_tolerance.
    bool tail_ok(double mean_photons) const;

    void validate() const;
};

/// Where the non-unit detector efficiency is applied.
///
///   subtraction_tap: the tapped mode passes a transmissivity-eta beam
///                    splitter before photon counting (binomial thinning).
///   homodyne:        Bob's measured mode passes the loss instead, ahead of
///                    the homodyne detector.
///   none:            ideal detectors everywhere regardless of det_eff.
enum class DetEffPlacement { subtraction_tap, homodyne, none };

/// Physical and protocol parameters shared by every key-rate computation.
/// Variances are in shot-noise units where the vacuum has variance 1.
struct ProtocolParams {
    double alpha_sq = 0.5;    ///< source mean photon number per mode
    double beta_sq = 0.001;   ///< channel-noise mean photon number per mode
    double channel_T = 1.0;   ///< channel transmittance in (0, 1]
    double tap_T1 = 0.9;      ///< subtraction tap transmittance in (0, 1]
    double recon_eff = 0.95;  ///< reconciliation efficiency in (0, 1]
    double det_eff = 0.68;    ///< photon detector efficiency in (0, 1]
    DetEffPlacement det_eff_placement = DetEffPlacement::subtraction_tap;
    TruncationConfig trunc{};

    /// Throws std::invalid_argument when any parameter is out of range.
    void validate() const;

    /// Human-readable warning when the truncation tail exceeds the
    /// configured tolerance for either source, otherwise std::nullopt.
    std::optional<std::string> tail_warning() const;
};

/// Receiver-side photon subtraction variant.
///
///   none:     conventional protocol, no tap measurement.
///   counter:  keep runs where the tap counts exactly `photons` (>= 1).
///   detector: keep runs where the tap clicks (one or more photons).
struct SubtractionMode {
    enum class Variant { none, counter, detector };

    Variant variant = Variant::counter;
    int photons = 1;  ///< exact count for `counter`; ignored otherwise

    static SubtractionMode none() { return {Variant::none, 0}; }
    static SubtractionMode counter(int s) { return {Variant::counter, s}; }
    static SubtractionMode detector() { return {Variant::detector, 0}; }

    void validate() const;

    /// Stable textual form: "none", "counter:2", "detector".
    std::string label() const;

    /// Inverse of label(); also accepts bare "counter" as counter:1.
    /// Throws std::invalid_argument on anything else.
    static SubtractionMode parse(const std::string &text);

    bool operator==(const SubtractionMode &other) const {
        return variant == other.variant &&
               (variant != Variant::counter || photons == other.photons);
    }
};

/// The eight scalars that determine the Gaussian description of the
/// post-selected five-party state (modes A, B2, E, F; the measured tap mode
/// is already traced out). Diagonal entries are quadrature variances and
/// off-diagonal entries are q-q correlations, all in shot-noise units.
struct CovarianceElements {
    double V_A = 0;
    double V_B2 = 0;
    double V_E = 0;
    double V_F = 0;
    double C_AB2 = 0;
    double C_EF = 0;
    double C_EB2 = 0;
    double C_FB2 = 0;

    /// Throws physicality_error when a variance is below the vacuum floor or
    /// a correlation exceeds its Cauchy-Schwarz bound.
    void validate() const;
};

/// Dense symmetric covariance matrix with quadrature ordering
/// (q1, p1, q2, p2, ...) and a label per mode.
struct CovarianceMatrix {
    Eigen::MatrixXd entries;
    std::vector<std::string> mode_order;

    int num_modes() const { return static_cast<int>(mode_order.size()); }

    /// Throws std::invalid_argument when the matrix is not square of size
    /// 2 * num_modes, and physicality_error when it is not symmetric to tol.
    void validate_shape(double tol = 1e-12) const;
};

/// Everything key_rate() knows after one evaluation.
struct KeyRateResult {
    double key_rate = 0;          ///< bits per source pulse (includes P)
    double post_select_prob = 1;  ///< P, success probability of the tap test
    double mutual_info = 0;       ///< I(A:B2) in bits per post-selected pulse
    double holevo = 0;            ///< Holevo bound chi(B2:EF) in bits
    CovarianceElements elements{};
    ProtocolParams params{};
    SubtractionMode mode{};
};

}  // namespace psqkd

#endif  // PSQKD_TYPES_HPP
