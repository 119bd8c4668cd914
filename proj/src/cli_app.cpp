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

#include "psqkd/cli_app.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psqkd/covariance.hpp"
#include "psqkd/gausinfo.hpp"
#include "psqkd/optimize.hpp"
#include "psqkd/oracle.hpp"
#include "psqkd/protocol.hpp"

namespace psqkd::cli {

namespace {

std::string trim(const std::string &text) {
    std::size_t lo = 0;
    std::size_t hi = text.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1]))) --hi;
    return text.substr(lo, hi - lo);
}

double parse_double_strict(const std::string &text, const std::string &where) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(t, &used);
    } catch (const std::exception &) {
        throw std::invalid_argument(where + ": expected a number, got '" + text + "'");
    }
    if (used != t.size() || !std::isfinite(value)) {
        throw std::invalid_argument(where + ": expected a number, got '" + text + "'");
    }
    return value;
}

long long parse_int_strict(const std::string &text, const std::string &where) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(t, &used);
    } catch (const std::exception &) {
        throw std::invalid_argument(where + ": expected an integer, got '" + text + "'");
    }
    if (used != t.size()) {
        throw std::invalid_argument(where + ": expected an integer, got '" + text + "'");
    }
    return value;
}

bool parse_bool_strict(const std::string &text, const std::string &where) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument(where + ": expected true/false, got '" + text + "'");
}

DetEffPlacement parse_placement(const std::string &text, const std::string &where) {
    const std::string t = trim(text);
    if (t == "tap" || t == "subtraction_tap") return DetEffPlacement::subtraction_tap;
    if (t == "homodyne") return DetEffPlacement::homodyne;
    if (t == "none") return DetEffPlacement::none;
    throw std::invalid_argument(where + ": expected tap|homodyne|none, got '" + text + "'");
}

void write_csv_row(std::ostream &out, const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::string sci(double value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", value);
    return buf;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::vector<double> parse_range(const std::string &text) {
    const std::string t = trim(text);
    if (t.empty()) return {};
    const std::size_t c1 = t.find(':');
    const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : t.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || t.find(':', c2 + 1) != std::string::npos) {
        throw std::invalid_argument("range must be lo:hi:step, got '" + text + "'");
    }
    const double lo = parse_double_strict(t.substr(0, c1), "range");
    const double hi = parse_double_strict(t.substr(c1 + 1, c2 - c1 - 1), "range");
    const double step = parse_double_strict(t.substr(c2 + 1), "range");
    if (!(step > 0)) {
        throw std::invalid_argument("range step must be > 0, got '" + text + "'");
    }
    std::vector<double> grid;
    if (lo > hi) return grid;
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    grid.reserve(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= count; ++i) {
        grid.push_back(lo + static_cast<double>(i) * step);
    }
    return grid;
}

std::vector<double> parse_list(const std::string &text) {
    const std::string t = trim(text);
    std::vector<double> values;
    if (t.empty()) return values;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = t.find(',', start);
        const std::string item = t.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        values.push_back(parse_double_strict(item, "list"));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

void load_config_file(const std::string &path, RunConfig &cfg) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    bool saw_channel_t = false;
    bool saw_distance = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path + ":" + std::to_string(line_no);
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(where + ": expected key = value, got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(where + ": empty key");
        }

        if (key == "alpha_sq") {
            cfg.params.alpha_sq = parse_double_strict(value, where);
        } else if (key == "beta_sq") {
            cfg.params.beta_sq = parse_double_strict(value, where);
        } else if (key == "channel_T") {
            cfg.params.channel_T = parse_double_strict(value, where);
            saw_channel_t = true;
        } else if (key == "distance_km") {
            cfg.distance_km = parse_double_strict(value, where);
            cfg.distance_set = true;
            saw_distance = true;
        } else if (key == "tap_T1") {
            cfg.params.tap_T1 = parse_double_strict(value, where);
        } else if (key == "recon_eff") {
            cfg.params.recon_eff = parse_double_strict(value, where);
        } else if (key == "det_eff") {
            cfg.params.det_eff = parse_double_strict(value, where);
        } else if (key == "det_eff_placement") {
            cfg.params.det_eff_placement = parse_placement(value, where);
        } else if (key == "n_max") {
            const long long n = parse_int_strict(value, where);
            if (n < 1 || n > 4096) throw std::invalid_argument(where + ": n_max out of range");
            cfg.params.trunc.n_max = static_cast<int>(n);
        } else if (key == "tail_tolerance") {
            cfg.params.trunc.tail_tolerance = parse_double_strict(value, where);
        } else if (key == "variant") {
            try {
                cfg.mode = SubtractionMode::parse(value);
            } catch (const std::invalid_argument &e) {
                throw std::invalid_argument(where + ": " + e.what());
            }
            cfg.variants = {cfg.mode};
        } else if (key == "distances") {
            try {
                cfg.distances = parse_range(value);
            } catch (const std::invalid_argument &e) {
                throw std::invalid_argument(where + ": " + e.what());
            }
        } else if (key == "beta2_grid") {
            try {
                cfg.beta2_grid = parse_list(value);
            } catch (const std::invalid_argument &e) {
                throw std::invalid_argument(where + ": " + e.what());
            }
        } else if (key == "loss_db_per_km") {
            cfg.loss_db_per_km = parse_double_strict(value, where);
        } else if (key == "optimize_alpha") {
            cfg.optimize_alpha = parse_bool_strict(value, where);
        } else if (key == "format") {
            if (value != "csv" && value != "json") {
                throw std::invalid_argument(where + ": format must be csv or json");
            }
            cfg.format = value;
        } else if (key == "out") {
            cfg.out_path = value;
        } else if (key == "jobs") {
            const long long n = parse_int_strict(value, where);
            if (n < 1 || n > 256) throw std::invalid_argument(where + ": jobs out of range");
            cfg.jobs = static_cast<int>(n);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int_strict(value, where));
        } else if (key == "oracle_n_max") {
            const long long n = parse_int_strict(value, where);
            if (n < 1 || n > 4096) throw std::invalid_argument(where + ": oracle_n_max out of range");
            cfg.oracle_n_max = static_cast<int>(n);
        } else {
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
        }

        if (saw_channel_t && saw_distance) {
            throw std::invalid_argument(where + ": channel_T and distance_km are mutually exclusive");
        }
    }
}

int cmd_keyrate(const RunConfig &cfg, std::ostream &out) {
    ProtocolParams p = cfg.params;
    if (const auto warning = p.tail_warning()) {
        std::cerr << "warning: " << *warning << '\n';
    }
    if (cfg.optimize_alpha) {
        p.alpha_sq = optimize::optimize_alpha(p, cfg.mode, cfg.jobs).best_alpha_sq;
    }
    const KeyRateResult res = protocol::key_rate(p, cfg.mode, cfg.jobs);
    const CovarianceElements &e = res.elements;
    if (cfg.format == "json") {
        nlohmann::json j;
        j["variant"] = cfg.mode.label();
        j["channel_T"] = p.channel_T;
        j["alpha_sq"] = p.alpha_sq;
        j["beta_sq"] = p.beta_sq;
        j["post_select_prob"] = res.post_select_prob;
        j["mutual_info"] = res.mutual_info;
        j["holevo"] = res.holevo;
        j["key_rate"] = res.key_rate;
        j["elements"]["V_A"] = e.V_A;
        j["elements"]["V_B2"] = e.V_B2;
        j["elements"]["V_E"] = e.V_E;
        j["elements"]["V_F"] = e.V_F;
        j["elements"]["C_AB2"] = e.C_AB2;
        j["elements"]["C_EF"] = e.C_EF;
        j["elements"]["C_EB2"] = e.C_EB2;
        j["elements"]["C_FB2"] = e.C_FB2;
        out << j.dump(2) << '\n';
    } else {
        write_csv_row(out, {"variant", "channel_T", "alpha_sq", "beta_sq", "post_select_prob",
                            "mutual_info", "holevo", "key_rate", "V_A", "V_B2", "V_E", "V_F",
                            "C_AB2", "C_EF", "C_EB2", "C_FB2"});
        write_csv_row(out, {cfg.mode.label(), format_double(p.channel_T), format_double(p.alpha_sq),
                            format_double(p.beta_sq), format_double(res.post_select_prob),
                            format_double(res.mutual_info), format_double(res.holevo),
                            format_double(res.key_rate), format_double(e.V_A), format_double(e.V_B2),
                            format_double(e.V_E), format_double(e.V_F), format_double(e.C_AB2),
                            format_double(e.C_EF), format_double(e.C_EB2), format_double(e.C_FB2)});
    }
    return 0;
}

int cmd_sweep(const RunConfig &cfg, std::ostream &out) {
    if (const auto warning = cfg.params.tail_warning()) {
        std::cerr << "warning: " << *warning << '\n';
    }
    const bool json = cfg.format == "json";
    nlohmann::json rows = nlohmann::json::array();
    if (!json) {
        write_csv_row(out, {"distance_km", "variant", "post_select_prob", "mutual_info", "holevo",
                            "key_rate", "alpha_sq"});
    }
    for (const SubtractionMode &variant : cfg.variants) {
        const auto points = protocol::key_rate_vs_distance(cfg.params, variant, cfg.distances,
                                                           cfg.loss_db_per_km, cfg.optimize_alpha,
                                                           cfg.jobs);
        for (const auto &pt : points) {
            const KeyRateResult &r = pt.result;
            if (json) {
                nlohmann::json row;
                row["distance_km"] = pt.distance_km;
                row["variant"] = variant.label();
                row["post_select_prob"] = r.post_select_prob;
                row["mutual_info"] = r.mutual_info;
                row["holevo"] = r.holevo;
                row["key_rate"] = r.key_rate;
                row["alpha_sq"] = r.params.alpha_sq;
                rows.push_back(row);
            } else {
                write_csv_row(out, {format_double(pt.distance_km), variant.label(),
                                    format_double(r.post_select_prob), format_double(r.mutual_info),
                                    format_double(r.holevo), format_double(r.key_rate),
                                    format_double(r.params.alpha_sq)});
            }
        }
    }
    if (json) out << rows.dump(2) << '\n';
    return 0;
}

int cmd_maxdistance(const RunConfig &cfg, std::ostream &out) {
    const std::vector<double> grid =
        cfg.beta2_grid.empty() ? std::vector<double>{cfg.params.beta_sq} : cfg.beta2_grid;
    const bool json = cfg.format == "json";
    nlohmann::json rows = nlohmann::json::array();
    if (!json) {
        write_csv_row(out, {"beta_sq", "variant", "max_distance_km"});
    }
    for (const SubtractionMode &variant : cfg.variants) {
        for (const double beta_sq : grid) {
            ProtocolParams p = cfg.params;
            p.beta_sq = beta_sq;
            const double dmax = optimize::max_distance(p, variant, cfg.loss_db_per_km, cfg.jobs);
            if (json) {
                nlohmann::json row;
                row["beta_sq"] = beta_sq;
                row["variant"] = variant.label();
                row["max_distance_km"] = dmax;
                rows.push_back(row);
            } else {
                write_csv_row(out, {format_double(beta_sq), variant.label(), format_double(dmax)});
            }
        }
    }
    if (json) out << rows.dump(2) << '\n';
    return 0;
}

namespace {

struct ElementField {
    const char *name;
    double CovarianceElements::*ptr;
};

constexpr ElementField kElementFields[8] = {
    {"V_A", &CovarianceElements::V_A},     {"V_B2", &CovarianceElements::V_B2},
    {"V_E", &CovarianceElements::V_E},     {"V_F", &CovarianceElements::V_F},
    {"C_AB2", &CovarianceElements::C_AB2}, {"C_EF", &CovarianceElements::C_EF},
    {"C_EB2", &CovarianceElements::C_EB2}, {"C_FB2", &CovarianceElements::C_FB2},
};

// q-q entries of the 8x8 oracle covariance over modes ordered (A, B, E, F).
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

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

std::vector<oracle::Branch> tap_branches(const oracle::FockState &joint, const SubtractionMode &mode,
                                         double eta, double *prob_out) {
    if (mode.variant == SubtractionMode::Variant::counter) {
        if (eta == 1.0) {
            auto [state, prob] = oracle::postselect_exact(joint, "C", mode.photons);
            *prob_out = prob;
            return {{1.0, std::move(state)}};
        }
        auto [branches, prob] = oracle::postselect_counter_thinned(joint, "C", mode.photons, eta);
        *prob_out = prob;
        return branches;
    }
    if (eta == 1.0) {
        auto [branches, prob] = oracle::postselect_threshold(joint, "C");
        *prob_out = prob;
        return branches;
    }
    auto [branches, prob] = oracle::postselect_threshold_thinned(joint, "C", eta);
    *prob_out = prob;
    return branches;
}

}  // namespace

int cmd_verify(const RunConfig &cfg, std::ostream &out) {
    const int n_closed = cfg.params.trunc.n_max;
    const int n_oracle = cfg.oracle_n_max > 0 ? cfg.oracle_n_max : n_closed;
    if (n_oracle != n_closed) {
        out << "configuration error: oracle truncation n_max=" << n_oracle
            << " differs from closed-form n_max=" << n_closed
            << "; the equivalence check requires matched truncation\n";
        return 2;
    }
    constexpr double kTol = 1e-9;          // max relative error, closed form vs oracle
    constexpr double kSlackFloor = -1e-9;  // Gaussian-dominance slack floor

    struct Probe {
        double alpha_sq, beta_sq, channel_T;
    };
    const Probe probes[] = {{0.2, 0.0, 0.3}, {0.5, 0.001, 0.5}, {1.0, 0.01, 0.9}};
    const SubtractionMode modes[] = {SubtractionMode::counter(1), SubtractionMode::counter(2),
                                     SubtractionMode::detector()};
    const double etas[] = {1.0, 0.68};

    double max_rel_prob = 0.0;
    double max_rel_element[8] = {};
    double max_rel_gamma = 0.0;  // full-matrix check, scaled by the matrix's largest entry
    int cases = 0;

    for (const Probe &probe : probes) {
        ProtocolParams base = cfg.params;
        base.alpha_sq = probe.alpha_sq;
        base.beta_sq = probe.beta_sq;
        base.channel_T = probe.channel_T;
        base.det_eff_placement = DetEffPlacement::subtraction_tap;
        const oracle::FockState joint = oracle::build_joint_state(base);

        for (const SubtractionMode &mode : modes) {
            for (const double eta : etas) {
                ProtocolParams p = base;
                p.det_eff = eta;
                ProtocolParams p_closed = p;
                if (cfg.corrupt_tap) {
                    p_closed.tap_T1 = std::min(0.999999, p.tap_T1 * 1.001);
                }
                const auto closed = covariance::elements_with_probability(p_closed, mode, cfg.jobs);

                double oracle_prob = 1.0;
                const auto branches = tap_branches(joint, mode, eta, &oracle_prob);
                const CovarianceMatrix cov =
                    oracle::covariance_from_branches(branches, {"A", "B", "E", "F"});
                const CovarianceElements from_oracle = elements_from_gamma(cov.entries);

                max_rel_prob = std::max(max_rel_prob, rel_err(closed.post_select_prob, oracle_prob));
                for (int i = 0; i < 8; ++i) {
                    const double got = closed.elements.*(kElementFields[i].ptr);
                    const double want = from_oracle.*(kElementFields[i].ptr);
                    max_rel_element[i] = std::max(max_rel_element[i], rel_err(got, want));
                }

                // Full-matrix structure check: assembled blocks against the
                // oracle marginals, including every p-p and q-p entry.
                const CovarianceMatrix g_efb2 =
                    oracle::covariance_from_branches(branches, {"E", "F", "B"});
                const CovarianceMatrix g_ab2 =
                    oracle::covariance_from_branches(branches, {"A", "B"});
                const Eigen::MatrixXd built_efb2 =
                    covariance::assemble_gamma_efb2(closed.elements).entries;
                const Eigen::MatrixXd built_ab2 =
                    covariance::assemble_gamma_ab2(closed.elements).entries;
                const double scale_efb2 = std::max(1.0, g_efb2.entries.cwiseAbs().maxCoeff());
                const double scale_ab2 = std::max(1.0, g_ab2.entries.cwiseAbs().maxCoeff());
                max_rel_gamma = std::max(
                    max_rel_gamma,
                    (built_efb2 - g_efb2.entries).cwiseAbs().maxCoeff() / scale_efb2);
                max_rel_gamma = std::max(
                    max_rel_gamma, (built_ab2 - g_ab2.entries).cwiseAbs().maxCoeff() / scale_ab2);
                ++cases;
            }
        }
    }

    out << "closed-form vs oracle equivalence (subtraction modes): n_max=" << n_closed << ", "
        << cases << " cases\n";
    out << "  P        " << sci(max_rel_prob) << '\n';
    bool equivalence_ok = max_rel_prob <= kTol;
    for (int i = 0; i < 8; ++i) {
        out << "  " << kElementFields[i].name;
        for (std::size_t pad = std::string(kElementFields[i].name).size(); pad < 7; ++pad) out << ' ';
        out << "  " << sci(max_rel_element[i]) << '\n';
        equivalence_ok = equivalence_ok && max_rel_element[i] <= kTol;
    }
    out << "  full gamma blocks (EFB2, AB2), scaled max entry error: " << sci(max_rel_gamma) << '\n';
    equivalence_ok = equivalence_ok && max_rel_gamma <= kTol;
    out << "  tolerance " << sci(kTol) << (equivalence_ok ? "  [ok]\n" : "  [exceeded]\n");

    // The conventional baseline is analytic (no truncation), so its oracle
    // comparison runs at small mean photon numbers and a deeper cutoff where
    // the oracle state's truncation tail sits far below the gate.
    double max_rel_baseline = 0.0;
    {
        ProtocolParams p = cfg.params;
        p.alpha_sq = 0.1;
        p.beta_sq = 0.005;
        p.channel_T = 0.55;
        p.trunc.n_max = 24;
        const CovarianceElements analytic = covariance::baseline_elements(p);
        const oracle::FockState channel_only = oracle::build_channel_state(p);
        const CovarianceMatrix cov =
            oracle::covariance_from_state(channel_only, {"A", "B", "E", "F"});
        const CovarianceElements from_oracle = elements_from_gamma(cov.entries);
        for (int i = 0; i < 8; ++i) {
            const double got = analytic.*(kElementFields[i].ptr);
            const double want = from_oracle.*(kElementFields[i].ptr);
            max_rel_baseline = std::max(max_rel_baseline, rel_err(got, want));
        }
    }
    out << "conventional baseline vs oracle (n_max=24, small mu): " << sci(max_rel_baseline) << '\n';
    const bool baseline_ok = max_rel_baseline <= kTol;
    out << "  tolerance " << sci(kTol) << (baseline_ok ? "  [ok]\n" : "  [exceeded]\n");
    equivalence_ok = equivalence_ok && baseline_ok;

    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> draw_alpha(0.1, 1.0);
    std::uniform_real_distribution<double> draw_beta(0.0, 0.01);
    std::uniform_real_distribution<double> draw_t(0.3, 0.9);
    std::uniform_real_distribution<double> draw_t1(0.75, 0.95);
    const SubtractionMode draw_modes[4] = {SubtractionMode::counter(1), SubtractionMode::detector(),
                                           SubtractionMode::counter(2), SubtractionMode::counter(1)};

    out << "gaussian dominance: 4 seeded draws (seed " << cfg.seed << ")\n";
    bool dominance_ok = true;
    for (int d = 0; d < 4; ++d) {
        ProtocolParams p = cfg.params;
        p.alpha_sq = draw_alpha(gen);
        p.beta_sq = draw_beta(gen);
        p.channel_T = draw_t(gen);
        p.tap_T1 = draw_t1(gen);
        p.det_eff = 1.0;
        p.det_eff_placement = DetEffPlacement::subtraction_tap;
        const SubtractionMode mode = draw_modes[d];

        const oracle::FockState joint = oracle::build_joint_state(p);
        double prob = 0.0;
        const auto branches = tap_branches(joint, mode, 1.0, &prob);

        const double s_exact = oracle::entropy_exact(oracle::reduce(branches, {"E", "F"}));
        const double s_gauss =
            gausinfo::gaussian_entropy(oracle::covariance_from_branches(branches, {"E", "F"}));
        const double chi_exact = oracle::exact_holevo_homodyne(branches, "B", {"E", "F"});
        const auto closed = covariance::elements_with_probability(p, mode, cfg.jobs);
        // The certified Gaussian surrogate grants Eve a purification of the
        // Gaussian state with Bob and Alice's covariance, so it conditions
        // Gamma_AB2 rather than reading Eve's EF marginal.
        const double chi_gauss =
            gausinfo::holevo_information(covariance::assemble_gamma_ab2(closed.elements));

        const double entropy_slack = s_gauss - s_exact;
        const double holevo_slack = chi_gauss - chi_exact;
        dominance_ok =
            dominance_ok && entropy_slack >= kSlackFloor && holevo_slack >= kSlackFloor;
        out << "  draw " << (d + 1) << " [" << mode.label() << "] entropy slack " << sci(entropy_slack)
            << "  holevo slack " << sci(holevo_slack) << '\n';
    }
    out << "  slack floor " << sci(kSlackFloor) << (dominance_ok ? "  [ok]\n" : "  [violated]\n");

    const bool ok = equivalence_ok && dominance_ok;
    out << (ok ? "VERIFY PASS\n" : "VERIFY FAIL\n");
    return ok ? 0 : 1;
}

int run(int argc, const char *const *argv) {
    CLI::App app{"asymptotic key rates for continuous-variable QKD with receiver-side photon subtraction"};
    app.require_subcommand(1);

    struct Flags {
        std::optional<std::string> config;
        std::optional<std::string> out;
        std::optional<std::string> format;
        std::optional<int> jobs;
        bool optimize = false;
        std::vector<std::string> variants;
        std::optional<std::string> distances;
        std::optional<std::string> beta2;
        std::optional<double> loss;
        std::optional<int> oracle_nmax;
        std::optional<std::uint64_t> seed;
        bool corrupt_tap = false;
    } fl;

    const auto add_common = [&fl](CLI::App *sub) {
        sub->add_option("--config", fl.config, "flat key=value parameter file");
        sub->add_option("--out", fl.out, "output file (default: stdout)");
        sub->add_option("--format", fl.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", fl.jobs, "worker threads for the truncated sums")
            ->check(CLI::Range(1, 256));
        sub->add_option("--loss-db-per-km", fl.loss, "fiber attenuation in dB/km");
        sub->add_option("--seed", fl.seed, "seed for randomized checks");
    };
    const auto add_variant = [&fl](CLI::App *sub) {
        sub->add_option("--variant", fl.variants,
                        "subtraction variant: none | counter:S | detector (repeatable)");
    };

    CLI::App *keyrate = app.add_subcommand("keyrate", "one key-rate evaluation");
    add_common(keyrate);
    add_variant(keyrate);
    keyrate->add_flag("--optimize-alpha", fl.optimize, "optimize the source strength first");

    CLI::App *sweep = app.add_subcommand("sweep", "key rate across a distance grid");
    add_common(sweep);
    add_variant(sweep);
    sweep->add_flag("--optimize-alpha", fl.optimize, "re-optimize the source at every distance");
    sweep->add_option("--distances", fl.distances, "distance grid lo:hi:step in km");

    CLI::App *maxd = app.add_subcommand("maxdistance",
                                        "maximum secure distance (source always optimized)");
    add_common(maxd);
    add_variant(maxd);
    maxd->add_option("--beta2-grid", fl.beta2, "comma-separated channel-noise strengths");

    CLI::App *verify = app.add_subcommand("verify", "closed form vs brute-force oracle self-check");
    add_common(verify);
    verify->add_option("--oracle-nmax", fl.oracle_nmax, "oracle truncation (must match n_max)");
    verify->add_flag("--corrupt-tap", fl.corrupt_tap, "")->group("");  // fault-injection hook

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    try {
        RunConfig cfg;
        if (name == "verify") {
            cfg.params.trunc.n_max = 8;  // oracle-friendly default; config may override
        }
        if (fl.config) load_config_file(*fl.config, cfg);
        if (fl.out) cfg.out_path = *fl.out;
        if (fl.format) cfg.format = *fl.format;
        if (fl.jobs) cfg.jobs = *fl.jobs;
        if (fl.loss) {
            if (!std::isfinite(*fl.loss) || *fl.loss < 0) {
                throw std::invalid_argument("--loss-db-per-km must be finite and >= 0");
            }
            cfg.loss_db_per_km = *fl.loss;
        }
        if (fl.optimize) cfg.optimize_alpha = true;
        if (!fl.variants.empty()) {
            cfg.variants.clear();
            for (const std::string &text : fl.variants) {
                cfg.variants.push_back(SubtractionMode::parse(text));
            }
            cfg.mode = cfg.variants.front();
        }
        if (fl.distances) cfg.distances = parse_range(*fl.distances);
        if (fl.beta2) cfg.beta2_grid = parse_list(*fl.beta2);
        if (fl.seed) cfg.seed = *fl.seed;
        if (fl.oracle_nmax) cfg.oracle_n_max = *fl.oracle_nmax;
        if (fl.corrupt_tap) cfg.corrupt_tap = true;

        if (cfg.distance_set) {
            cfg.params.channel_T =
                protocol::distance_to_transmittance(cfg.distance_km, cfg.loss_db_per_km);
        }
        cfg.params.validate();
        cfg.mode.validate();
        for (const SubtractionMode &variant : cfg.variants) variant.validate();

        std::ofstream file;
        std::ostream *out = &std::cout;
        if (!cfg.out_path.empty()) {
            file.open(cfg.out_path, std::ios::binary);
            if (!file) {
                throw std::invalid_argument("cannot open output file: " + cfg.out_path);
            }
            out = &file;
        }

        if (name == "keyrate") return cmd_keyrate(cfg, *out);
        if (name == "sweep") return cmd_sweep(cfg, *out);
        if (name == "maxdistance") return cmd_maxdistance(cfg, *out);
        return cmd_verify(cfg, *out);
    } catch (const physicality_error &e) {
        std::cerr << "physicality error: " << e.what() << '\n';
        return 3;
    } catch (const postselection_error &e) {
        std::cerr << "post-selection error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace psqkd::cli
