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
#include <numbers>

#include "mmwave/signal_model.hpp"

using namespace mmwave;

namespace {

Beamformer unit_beam(std::vector<cxd> w) {
    double nsq = 0.0;
    for (const auto& c : w) nsq += std::norm(c);
    for (auto& c : w) c /= std::sqrt(nsq);
    return Beamformer{std::move(w)};
}

// Dense construction of the channel matrix followed by a plain
// matrix-vector product; the production path never forms the matrix.
std::vector<cxd> dense_effective_channel(const MultipathChannel& ch,
                                         const std::vector<cxd>& w,
                                         const UlaConfig& rx, const UlaConfig& tx) {
    std::vector<std::vector<cxd>> H(static_cast<std::size_t>(rx.n_elements),
                                    std::vector<cxd>(static_cast<std::size_t>(tx.n_elements)));
    for (const auto& p : ch.paths) {
        const auto u = steering_vector(rx, p.aoa);
        const auto v = steering_vector(tx, p.aod);
        for (int r = 0; r < rx.n_elements; ++r) {
            for (int t = 0; t < tx.n_elements; ++t) {
                H[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] +=
                    p.gain * std::conj(u[static_cast<std::size_t>(r)]) *
                    v[static_cast<std::size_t>(t)];
            }
        }
    }
    std::vector<cxd> h(static_cast<std::size_t>(rx.n_elements));
    for (int r = 0; r < rx.n_elements; ++r) {
        for (int t = 0; t < tx.n_elements; ++t) {
            h[static_cast<std::size_t>(r)] +=
                H[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] *
                w[static_cast<std::size_t>(t)];
        }
    }
    return h;
}

} // namespace

TEST_CASE("steering vector basics") {
    const UlaConfig four{4};
    const auto v0 = steering_vector(four, 0.0);
    for (const auto& e : v0) CHECK(std::abs(e - cxd{1.0, 0.0}) < 1e-15);

    const auto v2 = steering_vector(UlaConfig{2}, std::numbers::pi / 6.0);
    CHECK(std::abs(v2[0] - cxd{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(v2[1] - cxd{0.0, 1.0}) < 1e-15);

    // per-entry evaluation as an independent check of the phasor chain
    const auto v8 = steering_vector(UlaConfig{8}, 0.3);
    for (int k = 0; k < 8; ++k) {
        const double phase = std::numbers::pi * k * std::sin(0.3);
        CHECK(std::abs(v8[static_cast<std::size_t>(k)] - cxd{std::cos(phase), std::sin(phase)}) <
              1e-13);
        CHECK(std::abs(std::abs(v8[static_cast<std::size_t>(k)]) - 1.0) < 1e-13);
    }

    double nsq = 0.0;
    for (const auto& e : v8) nsq += std::norm(e);
    CHECK(nsq == Catch::Approx(8.0).epsilon(1e-13));

    CHECK_THROWS_AS(steering_vector(four, 1.7), std::domain_error);
}

TEST_CASE("channel sampling calibration") {
    ChannelConfig single;
    single.q_paths = 1;
    single.pathloss = 1.0;
    RngStream rng(5);
    const auto ch = sample_channel(rng, single);
    REQUIRE(ch.paths.size() == 1);
    CHECK(std::norm(ch.paths[0].gain) == Catch::Approx(1.0).epsilon(1e-12));

    ChannelConfig cfg;
    cfg.q_paths = 6;
    cfg.dominant_ratio_db = 13.2;
    cfg.pathloss = 1.0;
    const double expected_scatter = 1.0 / (1.0 + std::pow(10.0, 1.32));
    CHECK(cfg.dominant_power() == Catch::Approx(1.0 - expected_scatter).epsilon(1e-12));
    CHECK(5.0 * cfg.scattered_power_per_path() ==
          Catch::Approx(expected_scatter).epsilon(1e-12));
}

TEST_CASE("scattered path energy matches the configured split", "[slow]") {
    ChannelConfig cfg;
    cfg.q_paths = 6;
    cfg.dominant_ratio_db = 13.2;
    cfg.pathloss = 1.0;
    RngStream rng(17);
    const int trials = 100000;
    double scatter = 0.0;
    for (int i = 0; i < trials; ++i) {
        const auto ch = sample_channel(rng, cfg);
        for (std::size_t q = 1; q < ch.paths.size(); ++q) {
            scatter += std::norm(ch.paths[q].gain);
        }
    }
    const double expected = 1.0 / (1.0 + std::pow(10.0, 1.32));
    CHECK(scatter / trials == Catch::Approx(expected).epsilon(0.01));
}

TEST_CASE("window keeps the dominant path and redraws scattering") {
    ChannelConfig cfg;
    cfg.q_paths = 6;
    RngStream rng(3);
    const auto window = sample_channel_window(rng, cfg, 4);
    REQUIRE(window.size() == 4);
    for (const auto& ch : window) {
        CHECK(std::abs(ch.paths[0].gain - window[0].paths[0].gain) == 0.0);
        CHECK(ch.paths[0].aoa == window[0].paths[0].aoa);
    }
    CHECK(window[0].paths[1].gain != window[1].paths[1].gain);
}

TEST_CASE("effective channel against the dense matrix build") {
    const UlaConfig rx{3}, tx{5};
    RngStream rng(11);

    MultipathChannel zero;
    zero.paths.push_back(PathComponent{cxd{0.0, 0.0}, 0.1, -0.2});
    const auto w = unit_beam({{1, 0}, {0, 1}, {1, 1}, {0, 0}, {-1, 0.5}});
    for (const auto& e : effective_channel(zero, w.w, rx, tx)) {
        CHECK(std::abs(e) == 0.0);
    }

    // matched single path: w = conj(v(aod)) / sqrt(n_t)
    MultipathChannel single;
    single.paths.push_back(PathComponent{cxd{1.0, 0.0}, 0.4, -0.3});
    auto vw = steering_vector(tx, -0.3);
    for (auto& c : vw) c = std::conj(c) / std::sqrt(5.0);
    const auto h = effective_channel(single, vw, rx, tx);
    double hsq = 0.0;
    for (const auto& e : h) hsq += std::norm(e);
    CHECK(hsq == Catch::Approx(5.0 * 3.0).epsilon(1e-12));

    ChannelConfig cfg;
    cfg.q_paths = 2;
    for (int rep = 0; rep < 5; ++rep) {
        const auto ch = sample_channel(rng, cfg);
        const auto fast = effective_channel(ch, w.w, rx, tx);
        const auto dense = dense_effective_channel(ch, w.w, rx, tx);
        double num = 0.0, den = 0.0;
        for (std::size_t r = 0; r < fast.size(); ++r) {
            num += std::norm(fast[r] - dense[r]);
            den += std::norm(dense[r]);
        }
        CHECK(num <= 1e-24 * std::max(1.0, den));
    }

    CHECK_THROWS_AS(effective_channel(single, std::span<const cxd>(vw.data(), 3), rx, tx),
                    std::invalid_argument);
}

TEST_CASE("beam gain contracts") {
    const UlaConfig tx{8};
    std::vector<cxd> e1(8, cxd{0.0, 0.0});
    e1[0] = {1.0, 0.0};
    CHECK(beam_gain(e1, 0.7, tx) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(beam_gain(e1, -0.2, tx) == Catch::Approx(1.0).epsilon(1e-12));

    auto matched = steering_vector(tx, 0.25);
    for (auto& c : matched) c = std::conj(c) / std::sqrt(8.0);
    CHECK(beam_gain(matched, 0.25, tx) == Catch::Approx(8.0).epsilon(1e-12));

    std::vector<cxd> bad(8, cxd{1.0, 0.0});
    CHECK_THROWS_AS(beam_gain(bad, 0.0, tx), std::invalid_argument);
}

TEST_CASE("sin-space energy conservation of the gain pattern") {
    RngStream rng(23);
    for (int n_t : {2, 7, 32}) {
        std::vector<cxd> w(static_cast<std::size_t>(n_t));
        for (auto& c : w) c = rng.complex_normal(1.0);
        double nsq = 0.0;
        for (const auto& c : w) nsq += std::norm(c);
        for (auto& c : w) c /= std::sqrt(nsq);
        CHECK(mean_gain_sin_space(w, UlaConfig{n_t}) == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("average beam gain over random directions", "[slow]") {
    RngStream rng(29);
    const UlaConfig tx{32};
    std::vector<cxd> w(32);
    for (auto& c : w) c = rng.complex_normal(1.0);
    double nsq = 0.0;
    for (const auto& c : w) nsq += std::norm(c);
    for (auto& c : w) c /= std::sqrt(nsq);

    const int trials = 2000000;
    double acc = 0.0;
    for (int i = 0; i < trials; ++i) {
        const double u = rng.uniform(-1.0, 1.0);
        acc += beam_gain(w, std::asin(u), tx);
    }
    CHECK(acc / trials == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("reference signal normalization and determinism") {
    const auto rs = generate_rs(100, 1.0, RsKind::qpsk, 7);
    CHECK(rs.energy() == Catch::Approx(100.0).epsilon(1e-12));

    const auto rs2 = generate_rs(4, 2.0, RsKind::qpsk, 7);
    CHECK(rs2.energy() == Catch::Approx(8.0).epsilon(1e-12));

    const auto a = generate_rs(64, 1.0, RsKind::qpsk, 99);
    const auto b = generate_rs(64, 1.0, RsKind::qpsk, 99);
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

    const auto zc = generate_rs(63, 3.0, RsKind::zadoff_chu, 0);
    CHECK(zc.energy() == Catch::Approx(63.0 * 3.0).epsilon(1e-12));
    for (const auto& s : zc.samples) {
        CHECK(std::abs(s) == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(generate_rs(1, 1.0, RsKind::qpsk, 0), std::domain_error);
}

TEST_CASE("frame configuration") {
    const FrameConfig frame{5e-4, 1e-5, 1e7};
    CHECK(frame.n_slot() == 5000);
    CHECK(frame.n_s() == 100);
    frame.validate();
    CHECK_THROWS_AS((FrameConfig{1e-5, 1e-5, 1e7}).validate(), std::invalid_argument);
}

TEST_CASE("observation synthesis recovers the signal term") {
    const UlaConfig rx{2}, tx{4};
    ChannelConfig cfg;
    cfg.q_paths = 2;
    RngStream rng(31);
    const auto window = sample_channel_window(rng, cfg, 3);
    const std::vector<Beamformer> beams(3, unit_beam({{1, 0}, {0, 1}, {1, -1}, {0.5, 0}}));
    const auto rs = generate_rs(16, 1.0, RsKind::qpsk, 1);

    RngStream gen_h0(77), gen_h1(77);
    const auto y0 = synthesize_observation(gen_h0, window, beams, rs, 1.0, Hypothesis::h0,
                                           rx, tx);
    const auto y1 = synthesize_observation(gen_h1, window, beams, rs, 1.0, Hypothesis::h1,
                                           rx, tx);
    for (std::size_t l = 0; l < 3; ++l) {
        const auto h = effective_channel(window[l], beams[l].w, rx, tx);
        for (int r = 0; r < 2; ++r) {
            for (int k = 0; k < 16; ++k) {
                const auto idx = static_cast<std::size_t>(r) * 16 + static_cast<std::size_t>(k);
                const cxd recovered =
                    y1.blocks[l][idx] - h[static_cast<std::size_t>(r)] *
                                            rs.samples[static_cast<std::size_t>(k)];
                CHECK(std::abs(recovered - y0.blocks[l][idx]) < 1e-12);
            }
        }
    }

    CHECK_THROWS_AS(synthesize_observation(gen_h0, window, beams, rs, 0.0, Hypothesis::h0,
                                           rx, tx),
                    std::domain_error);

    // a zero-gain channel makes the two hypotheses bit-identical
    std::vector<MultipathChannel> dead(3);
    for (auto& ch : dead) ch.paths.push_back(PathComponent{cxd{0.0, 0.0}, 0.1, 0.2});
    RngStream z0(5), z1(5);
    const auto dead_h0 =
        synthesize_observation(z0, dead, beams, rs, 1.0, Hypothesis::h0, rx, tx);
    const auto dead_h1 =
        synthesize_observation(z1, dead, beams, rs, 1.0, Hypothesis::h1, rx, tx);
    for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < dead_h0.blocks[l].size(); ++k) {
            CHECK(dead_h0.blocks[l][k] == dead_h1.blocks[l][k]);
        }
    }
}

TEST_CASE("noise variance of synthesized observations", "[slow]") {
    const UlaConfig rx{2}, tx{2};
    ChannelConfig cfg;
    cfg.q_paths = 1;
    RngStream rng(41);
    const auto window = sample_channel_window(rng, cfg, 2);
    const std::vector<Beamformer> beams(2, unit_beam({{1, 0}, {0, 0}}));
    const auto rs = generate_rs(50, 1.0, RsKind::qpsk, 2);

    double acc = 0.0;
    cxd cross{0.0, 0.0};
    long count = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const auto win = synthesize_observation(rng, window, beams, rs, 1.0, Hypothesis::h0,
                                                rx, tx);
        for (const auto& block : win.blocks) {
            for (const auto& z : block) {
                acc += std::norm(z);
                ++count;
            }
            // adjacent-antenna sample covariance should vanish
            for (int k = 0; k < 50; ++k) {
                cross += block[static_cast<std::size_t>(k)] *
                         std::conj(block[static_cast<std::size_t>(50 + k)]);
            }
        }
    }
    CHECK(acc / static_cast<double>(count) == Catch::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(cross) / (static_cast<double>(count) / 2.0) < 0.01);
}
