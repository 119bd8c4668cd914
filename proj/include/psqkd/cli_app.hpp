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

#ifndef PSQKD_CLI_APP_HPP
#define PSQKD_CLI_APP_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "psqkd/types.hpp"

namespace psqkd::cli {

/// Complete description of one CLI invocation: the physical parameters plus
/// experiment selection, grids, output routing, parallelism, and the seed
/// used by the randomized verification sweeps.
struct RunConfig {
    ProtocolParams params{};
    SubtractionMode mode = SubtractionMode::counter(1);
    std::vector<SubtractionMode> variants{SubtractionMode::counter(1)};
    double distance_km = 0.0;
    bool distance_set = false;  ///< distance_km was given instead of channel_T
    double loss_db_per_km = 0.2;
    std::vector<double> distances;   ///< sweep grid in km
    std::vector<double> beta2_grid;  ///< maxdistance grid of noise strengths
    bool optimize_alpha = false;
    std::string out_path;        ///< empty: write to stdout
    std::string format = "csv";  ///< csv | json
    int jobs = 1;
    std::uint64_t seed = 20260819;
    int oracle_n_max = 0;      ///< verify: 0 means "follow params.trunc.n_max"
    bool corrupt_tap = false;  ///< verify fault-injection hook (forces a miss)
};

/// Applies a flat key=value config file on top of `cfg`. Blank lines and
/// lines starting with '#' are skipped. Unknown keys, malformed lines, bad
/// values, and giving both channel_T and distance_km raise
/// std::invalid_argument naming the offending line.
void load_config_file(const std::string &path, RunConfig &cfg);

/// Expands "lo:hi:step" into {lo, lo + step, ...} up to hi inclusive (with
/// rounding slack of a relative 1e-9 per step). An empty string or lo > hi
/// yields an empty grid; step must be > 0.
std::vector<double> parse_range(const std::string &text);

/// Splits "v1,v2,..." into doubles; an empty string yields an empty list.
std::vector<double> parse_list(const std::string &text);

/// Formats with 17 significant digits, so scanning the text back reproduces
/// the identical IEEE-754 double.
std::string format_double(double value);

/// Single key-rate evaluation; emits P, I, chi, K and the eight covariance
/// elements in the configured format.
int cmd_keyrate(const RunConfig &cfg, std::ostream &out);

/// Key rate over the distance grid for every requested variant, one row per
/// (variant, distance): distance_km, variant, post_select_prob, mutual_info,
/// holevo, key_rate, alpha_sq.
int cmd_sweep(const RunConfig &cfg, std::ostream &out);

/// Maximum secure distance over the beta_sq grid for every requested
/// variant, with the source strength optimized at every probe distance.
int cmd_maxdistance(const RunConfig &cfg, std::ostream &out);

/// Self-check: the closed-form route against the brute-force Fock oracle
/// (max relative error per covariance element), plus Gaussian-dominance
/// spot checks on seeded random parameter draws. Returns 0 on pass, 1 on
/// verification failure, 2 on a truncation-mismatch configuration error.
int cmd_verify(const RunConfig &cfg, std::ostream &out);

/// Full command-line entry point: argument parsing, config-then-flags
/// precedence, dispatch, output routing, and exit-code mapping (0 success,
/// 1 failed verification, 2 bad input, 3 numerical or physicality failure).
int run(int argc, const char *const *argv);

}  // namespace psqkd::cli

#endif  // PSQKD_CLI_APP_HPP
