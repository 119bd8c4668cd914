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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "psqkd/protocol.hpp"

using namespace psqkd;

TEST_CASE("fiber loss model anchors") {
    CHECK(protocol::distance_to_transmittance(0.0, 0.2) == 1.0);
    CHECK(protocol::distance_to_transmittance(50.0, 0.2) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(protocol::distance_to_transmittance(15.0, 0.2) ==
          doctest::Approx(std::pow(10.0, -0.3)).epsilon(1e-14));
    CHECK_THROWS_AS(protocol::distance_to_transmittance(-1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(protocol::distance_to_transmittance(10.0, -0.2), std::invalid_argument);
}

TEST_CASE("reported rate equals probability times the information balance") {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.001;
    p.channel_T = 0.5;
    p.tap_T1 = 0.9;
    p.det_eff = 1.0;
    p.trunc.n_max = 8;
    for (const SubtractionMode &mode :
         {SubtractionMode::none(), SubtractionMode::counter(1), SubtractionMode::detector()}) {
        CAPTURE(mode.label());
        const KeyRateResult r = protocol::key_rate(p, mode);
        CHECK(std::abs(r.key_rate -
                       r.post_select_prob * (p.recon_eff * r.mutual_info - r.holevo)) <= 1e-12);
        CHECK(r.post_select_prob > 0.0);
        CHECK(r.post_select_prob <= 1.0);
        CHECK(r.holevo >= 0.0);
    }
}

TEST_CASE("ideal tap detector makes the efficiency placement irrelevant") {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.001;
    p.channel_T = 0.5;
    p.tap_T1 = 0.9;
    p.det_eff = 1.0;
    p.trunc.n_max = 8;
    p.det_eff_placement = DetEffPlacement::subtraction_tap;
    const KeyRateResult tap = protocol::key_rate(p, SubtractionMode::counter(1));
    p.det_eff_placement = DetEffPlacement::homodyne;
    const KeyRateResult hom = protocol::key_rate(p, SubtractionMode::counter(1));
    CHECK(tap.key_rate == hom.key_rate);
    CHECK(tap.post_select_prob == hom.post_select_prob);
    CHECK(tap.mutual_info == hom.mutual_info);
    CHECK(tap.holevo == hom.holevo);
}

TEST_CASE("conventional protocol ignores the tap parameters") {
    ProtocolParams p;
    p.alpha_sq = 0.4;
    p.beta_sq = 0.005;
    p.channel_T = 0.6;
    p.tap_T1 = 0.9;
    p.det_eff = 0.68;
    const KeyRateResult a = protocol::key_rate(p, SubtractionMode::none());
    p.tap_T1 = 0.5;
    p.det_eff = 1.0;
    const KeyRateResult b = protocol::key_rate(p, SubtractionMode::none());
    CHECK(a.key_rate == b.key_rate);
    CHECK(a.mutual_info == b.mutual_info);
    CHECK(a.holevo == b.holevo);
    CHECK(a.post_select_prob == 1.0);
}

TEST_CASE("fully transparent tap never fires") {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 0.001;
    p.channel_T = 0.5;
    p.tap_T1 = 1.0;
    p.trunc.n_max = 8;
    CHECK_THROWS_AS(protocol::key_rate(p, SubtractionMode::counter(1)), postselection_error);
}

TEST_CASE("lossless noiseless line: closed rate and monotone growth in signal power") {
    ProtocolParams p;
    p.beta_sq = 0.0;
    p.channel_T = 1.0;
    p.recon_eff = 1.0;

    p.alpha_sq = 1.0;
    const KeyRateResult unit = protocol::key_rate(p, SubtractionMode::none());
    CHECK(std::abs(unit.key_rate - std::log2(3.0)) <= 1e-12);
    CHECK(std::abs(unit.holevo) <= 1e-12);

    double prev = -1.0;
    for (double a2 : {0.2, 0.5, 1.0, 2.0, 4.0}) {
        p.alpha_sq = a2;
        const double k = protocol::key_rate(p, SubtractionMode::none()).key_rate;
        CHECK(k > prev);
        // On this channel the rate has the closed form log2(2*mu + 1).
        CHECK(k == doctest::Approx(std::log2(2.0 * a2 + 1.0)).epsilon(1e-12));
        prev = k;
    }
}

TEST_CASE("distance scan matches pointwise evaluation") {
    ProtocolParams p;
    p.alpha_sq = 0.3;
    p.beta_sq = 0.002;
    const std::vector<double> distances = {0.0, 10.0};
    const auto pts =
        protocol::key_rate_vs_distance(p, SubtractionMode::none(), distances, 0.2, false);
    REQUIRE(pts.size() == 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].distance_km == distances[i]);
        ProtocolParams at = p;
        at.channel_T = protocol::distance_to_transmittance(distances[i], 0.2);
        const KeyRateResult direct = protocol::key_rate(at, SubtractionMode::none());
        CHECK(pts[i].result.key_rate == direct.key_rate);
        CHECK(pts[i].result.holevo == direct.holevo);
    }

    CHECK(protocol::key_rate_vs_distance(p, SubtractionMode::none(), {}, 0.2, false).empty());
}

TEST_CASE("unprofitable channels report their losses unclamped") {
    ProtocolParams p;
    p.alpha_sq = 0.5;
    p.beta_sq = 10.0;
    p.channel_T = 0.5;
    const KeyRateResult r = protocol::key_rate(p, SubtractionMode::none());
    CHECK(r.key_rate < 0.0);
}
