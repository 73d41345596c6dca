// SPDX-License-Identifier: Apache-2.0
//
// mmwave-discovery-lab: link-level laboratory for mm-wave base station discovery
// Copyright (C) 2026 mmwave-discovery-lab contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "mmwave/beam_design.hpp"
#include "mmwave/errors.hpp"

using namespace mmwave;
using beam::AngularInterval;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// sin-space integral of a target pattern by fine midpoint quadrature
double sin_space_mean(const beam::TargetGain& g, double lo, double hi, int n = 200000) {
    const double ulo = std::sin(lo), uhi = std::sin(hi);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = ulo + (uhi - ulo) * (i + 0.5) / n;
        acc += g(std::asin(u));
    }
    return acc * (uhi - ulo) / n;
}

} // namespace

TEST_CASE("rate-to-pathloss conversion") {
    const beam::RateLink link{0.4, 1e9, 1e7, 1.0, 1.0, 32.0, 16.0};
    // R = rho W makes the threshold SNR exactly 1
    CHECK(beam::snr_for_rate(0.4e9, link) == Catch::Approx(1.0).epsilon(1e-12));
    // reference operating point: 10 Mbps over 1 GHz at rho = 0.4
    CHECK(beam::snr_for_rate(1e7, link) ==
          Catch::Approx(0.017479692102686295).epsilon(1e-12));

    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const auto profile = beam::pathloss_from_rate([](double) { return 0.4e9; }, link, sector);
    const double expected = (1.0 / 1.0) * (32.0 * 16.0 / 1.0) * (1e7 / 1e9);
    CHECK(profile.alpha(0.1) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(profile.mean_alpha == Catch::Approx(expected).epsilon(1e-9));
}

TEST_CASE("piecewise profile: half-blocked sector") {
    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const double a = 200.0;
    const auto profile = beam::PathlossProfile::piecewise(sector, {0.0}, {a / 2.0, a});
    CHECK(profile.alpha(-0.1) == a / 2.0);
    CHECK(profile.alpha(0.1) == a);
    // exact sin-space mean: equal halves
    CHECK(profile.mean_alpha == Catch::Approx(0.75 * a).epsilon(1e-12));
}

TEST_CASE("desired patterns integrate to the unit energy budget") {
    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const auto profile = beam::PathlossProfile::constant(sector, 150.0);

    for (int m : {1, 2, 4}) {
        const auto partition = beam::SectorPartition::equal_sin(profile, m);
        const auto targets = beam::desired_pattern(profile, partition);
        for (const auto& target : targets) {
            // (1/2) integral over u of the target equals 1 (all energy in band)
            CHECK(0.5 * sin_space_mean(target, sector.lo, sector.hi) ==
                  Catch::Approx(1.0).epsilon(1e-6));
        }
        // uniform pathloss: each target is flat at m times the sector level
        if (m == 4) {
            const double kappa_star = 2.0 / sector.sin_measure();
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const double mid = 0.5 * (partition.parts[i].lo + partition.parts[i].hi);
                CHECK(targets[i](mid) == Catch::Approx(4.0 * kappa_star).epsilon(1e-9));
            }
        }
    }

    // single flat piece: kappa* inside, zero outside
    const auto one = beam::desired_pattern(profile,
                                           beam::SectorPartition::equal_sin(profile, 1));
    CHECK(one[0](0.0) == Catch::Approx(2.0 / sector.sin_measure()).epsilon(1e-12));
    CHECK(one[0](40.0 * kDeg) == 0.0);
}

TEST_CASE("half-blocked targets keep the two-to-one level ratio") {
    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const double a = 100.0;
    const auto profile = beam::PathlossProfile::piecewise(sector, {0.0}, {a / 2.0, a});
    const auto partition = beam::SectorPartition::from_boundaries(profile, {0.0});
    const auto targets = beam::desired_pattern(profile, partition);
    // within each piece alpha is flat, so each target is flat at kappa_m;
    // the slot allocation, not the per-beam pattern, carries the asymmetry.
    const double t_blocked = targets[0](-10.0 * kDeg);
    const double t_open = targets[1](10.0 * kDeg);
    CHECK(t_blocked == Catch::Approx(t_open).epsilon(1e-9));

    // slot-weighted average gain reproduces the sector-wide desirable pattern
    const auto slots = beam::slot_allocation(partition, profile, 12);
    REQUIRE(slots.size() == 2);
    CHECK(slots[0] == 4);
    CHECK(slots[1] == 8);
    const double j = 12.0;
    const double kappa_star = 2.0 / sector.sin_measure();
    for (double phi : {-20.0 * kDeg, -5.0 * kDeg, 5.0 * kDeg, 20.0 * kDeg}) {
        const double avg =
            (slots[0] * targets[0](phi) + slots[1] * targets[1](phi)) / j;
        const double desired = kappa_star * profile.alpha(phi) / profile.mean_alpha;
        CHECK(avg == Catch::Approx(desired).epsilon(1e-9));
    }
}

TEST_CASE("slot allocation") {
    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const auto uniform = beam::PathlossProfile::constant(sector, 50.0);
    const auto p4 = beam::SectorPartition::equal_sin(uniform, 4);
    CHECK(beam::slot_allocation(p4, uniform, 16) == std::vector<int>{4, 4, 4, 4});

    const auto p1 = beam::SectorPartition::equal_sin(uniform, 1);
    CHECK(beam::slot_allocation(p1, uniform, 9) == std::vector<int>{9});

    CHECK_THROWS_AS(beam::slot_allocation(p4, uniform, 3), config_error);
}

TEST_CASE("constant-modulus synthesis recovers a matched narrow beam", "[slow]") {
    // target = the gain pattern of a conjugate-steered beam; the optimum is
    // that beam itself, which the phase-only search has to rediscover
    const int n_t = 16;
    const double phi0 = 10.0 * kDeg;
    const UlaConfig tx{n_t};
    auto matched = steering_vector(tx, phi0);
    for (auto& c : matched) c = std::conj(c) / std::sqrt(static_cast<double>(n_t));
    const AngularInterval band{phi0 - 8.0 * kDeg, phi0 + 8.0 * kDeg};
    const auto target = [&](double phi) {
        return band.contains(phi) ? beam_gain(matched, phi, tx) : 0.0;
    };
    beam::SynthesisConfig cfg;
    cfg.generations = 150;
    cfg.seed = 3;
    const auto [w, report] = beam::synthesize_cm(target, band, n_t, cfg);
    CHECK(w.norm_sq() == Catch::Approx(1.0).epsilon(1e-12));
    for (const auto& c : w.w) {
        CHECK(std::abs(c) == Catch::Approx(1.0 / std::sqrt(n_t)).epsilon(1e-9));
    }
    CHECK(beam_gain(w.w, phi0, UlaConfig{n_t}) >= 0.95 * n_t);
}

TEST_CASE("flat sector synthesis meets the coverage knobs", "[slow]") {
    const int n_t = 32;
    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const auto profile = beam::PathlossProfile::constant(sector, 1.0);
    const auto targets =
        beam::desired_pattern(profile, beam::SectorPartition::equal_sin(profile, 1));
    const double kappa_star = 2.0 / sector.sin_measure();

    beam::SynthesisConfig cfg;
    cfg.generations = 300;
    cfg.seed = 7;
    const auto [w_vm, rep_vm] = beam::synthesize_vm(targets[0], sector, n_t, cfg);
    CHECK(w_vm.norm_sq() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rep_vm.min_in_band_gain >= 0.5 * kappa_star);       // within 3 dB
    CHECK(rep_vm.max_leakage <= 0.1 * kappa_star * 1.001);    // 10 dB below band level

    // variable-modulus magnitudes are mirror-symmetric
    for (int i = 0; i < n_t / 2; ++i) {
        CHECK(std::abs(w_vm.w[static_cast<std::size_t>(i)]) ==
              Catch::Approx(std::abs(w_vm.w[static_cast<std::size_t>(n_t - 1 - i)]))
                  .margin(1e-12));
    }

    const auto [w_cm, rep_cm] = beam::synthesize_cm(targets[0], sector, n_t, cfg);
    CHECK(rep_cm.min_in_band_gain >= 0.5 * kappa_star);
    // the released magnitude constraint can only help the worst in-band point
    CHECK(rep_vm.min_in_band_gain >= rep_cm.min_in_band_gain * 0.95);
}

TEST_CASE("random codebook norms and slots") {
    RngStream rng(15);
    const auto cb = beam::random_codebook(rng, 8, 10);
    REQUIRE(cb.beams.size() == 10);
    CHECK(cb.period() == 10);
    for (const auto& b : cb.beams) {
        CHECK(b.norm_sq() == Catch::Approx(1.0).epsilon(1e-12));
    }
    for (int s : cb.slots) CHECK(s == 1);
}

TEST_CASE("random beams average to unit gain", "[slow]") {
    RngStream rng(55);
    const UlaConfig tx{16};
    double acc = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto cb = beam::random_codebook(rng, 16, 1);
        acc += beam_gain(cb.beams[0].w, 0.37, tx);
    }
    CHECK(acc / draws == Catch::Approx(1.0).epsilon(0.01));
}

TEST_CASE("per-antenna power constraint") {
    // constant-modulus beams are untouched for any feasible beta
    const int n_t = 8;
    std::vector<cxd> cm(static_cast<std::size_t>(n_t));
    for (auto& c : cm) c = cxd{1.0 / std::sqrt(n_t), 0.0};
    const auto [w1, f1] = beam::apply_power_constraint(Beamformer{cm}, 1.0 / n_t, n_t);
    CHECK(f1 == Catch::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < cm.size(); ++i) CHECK(w1.w[i] == cm[i]);

    // a fully concentrated beam at beta = 1/4 keeps a quarter of the power
    std::vector<cxd> spike(4, cxd{0.0, 0.0});
    spike[0] = {1.0, 0.0};
    const auto [w2, f2] = beam::apply_power_constraint(Beamformer{spike}, 0.25, 4);
    CHECK(f2 == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(std::norm(w2.w[0]) == Catch::Approx(0.25).epsilon(1e-12));

    // realized fraction is nondecreasing in beta and saturates at max |w|^2
    double prev = 0.0;
    for (int k = 0; k <= 15; ++k) {
        const double beta = 0.25 + k / 20.0;
        const auto [wb, fb] = beam::apply_power_constraint(Beamformer{spike}, beta, 4);
        CHECK(fb >= prev - 1e-12);
        prev = fb;
    }
    CHECK(prev == Catch::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(beam::apply_power_constraint(Beamformer{spike}, 0.1, 4), config_error);
}

TEST_CASE("average codebook gain composition") {
    const UlaConfig tx{8};
    beam::Codebook cb;
    std::vector<cxd> e1(8, cxd{0.0, 0.0});
    e1[0] = {1.0, 0.0};
    cb.beams.push_back(Beamformer{e1});
    cb.slots.push_back(3);
    CHECK(beam::avg_codebook_gain(cb, 0.3, tx) == Catch::Approx(1.0).epsilon(1e-12));

    auto matched = steering_vector(tx, 0.3);
    for (auto& c : matched) c = std::conj(c) / std::sqrt(8.0);
    cb.beams.push_back(Beamformer{matched});
    cb.slots.push_back(1);
    // 3 omni slots and 1 matched slot: (3*1 + 1*8)/4
    CHECK(beam::avg_codebook_gain(cb, 0.3, tx) == Catch::Approx(11.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("codebook JSON round trip is bit exact") {
    RngStream rng(71);
    auto cb = beam::random_codebook(rng, 6, 4);
    cb.slots = {2, 1, 3, 1};

    const AngularInterval sector{-30.0 * kDeg, 30.0 * kDeg};
    const auto profile = beam::PathlossProfile::constant(sector, 123.0);
    beam::CodebookMeta meta;
    meta.method = "random";
    meta.m = 4;
    meta.target_profile_hash = beam::target_profile_hash(profile);

    const auto path = std::filesystem::temp_directory_path() / "mmwave_cb_test.json";
    beam::save_codebook(cb, meta, path);
    const auto [loaded, loaded_meta] = beam::load_codebook(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.beams.size() == cb.beams.size());
    CHECK(loaded.slots == cb.slots);
    CHECK(loaded_meta.method == meta.method);
    CHECK(loaded_meta.target_profile_hash == meta.target_profile_hash);
    for (std::size_t b = 0; b < cb.beams.size(); ++b) {
        for (std::size_t i = 0; i < cb.beams[b].w.size(); ++i) {
            CHECK(loaded.beams[b].w[i].real() == cb.beams[b].w[i].real());
            CHECK(loaded.beams[b].w[i].imag() == cb.beams[b].w[i].imag());
        }
    }

    // the hash tracks the profile, not the codebook
    const auto other = beam::PathlossProfile::constant(sector, 124.0);
    CHECK(beam::target_profile_hash(other) != meta.target_profile_hash);
}
