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

#include "mmwave/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mmwave/kernels.hpp"

namespace mmwave {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void check_angle(double angle) {
    if (!(angle >= -kHalfPi && angle <= kHalfPi)) {
        throw std::domain_error("angle outside the array's unambiguous range [-pi/2, pi/2]");
    }
}

// Incremental phasor chain: entry k is e^{j pi k sin(angle)} without per-entry
// trig calls. Also used with conjugated sign for receive-side vectors.
void fill_steering(std::vector<cxd>& out, int n, double angle, double sign) {
    const double phase = sign * std::numbers::pi * std::sin(angle);
    const cxd step{std::cos(phase), std::sin(phase)};
    cxd cur{1.0, 0.0};
    out.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = cur;
        cur *= step;
    }
}

} // namespace

void UlaConfig::validate() const {
    if (n_elements < 1) throw std::invalid_argument("array needs n_elements >= 1");
    if (spacing != 0.5) throw std::invalid_argument("only half-wavelength spacing is modeled");
}

std::vector<cxd> steering_vector(const UlaConfig& array, double angle) {
    array.validate();
    check_angle(angle);
    std::vector<cxd> v;
    fill_steering(v, array.n_elements, angle, +1.0);
    return v;
}

double Beamformer::norm_sq() const {
    return kernels::sum_abs2(w.data(), w.size());
}

void ChannelConfig::validate() const {
    if (q_paths < 1) throw std::invalid_argument("channel needs q_paths >= 1");
    if (!(pathloss > 0.0)) throw std::invalid_argument("pathloss must be positive");
    check_angle(dominant_aod);
}

double ChannelConfig::dominant_power() const {
    if (q_paths == 1) return 1.0 / pathloss;
    const double r = std::pow(10.0, dominant_ratio_db / 10.0);
    return (r / (1.0 + r)) / pathloss;
}

double ChannelConfig::scattered_power_per_path() const {
    if (q_paths == 1) return 0.0;
    const double r = std::pow(10.0, dominant_ratio_db / 10.0);
    return (1.0 / (1.0 + r)) / pathloss / (q_paths - 1);
}

namespace {

PathComponent draw_dominant(RngStream& rng, const ChannelConfig& c) {
    const double mag = std::sqrt(c.dominant_power());
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return PathComponent{cxd{mag * std::cos(phase), mag * std::sin(phase)},
                         rng.uniform(c.aoa_lo, c.aoa_hi), c.dominant_aod};
}

PathComponent draw_scattered(RngStream& rng, const ChannelConfig& c) {
    return PathComponent{rng.complex_normal(c.scattered_power_per_path()),
                         rng.uniform(c.aoa_lo, c.aoa_hi),
                         rng.uniform(c.scatter_aod_lo, c.scatter_aod_hi)};
}

} // namespace

MultipathChannel sample_channel(RngStream& rng, const ChannelConfig& config) {
    config.validate();
    MultipathChannel ch;
    ch.paths.reserve(static_cast<std::size_t>(config.q_paths));
    ch.paths.push_back(draw_dominant(rng, config));
    for (int q = 1; q < config.q_paths; ++q) {
        ch.paths.push_back(draw_scattered(rng, config));
    }
    return ch;
}

std::vector<MultipathChannel> sample_channel_window(RngStream& rng,
                                                    const ChannelConfig& config,
                                                    int l_slots) {
    config.validate();
    if (l_slots < 1) throw std::invalid_argument("window needs l_slots >= 1");
    std::vector<MultipathChannel> window;
    window.reserve(static_cast<std::size_t>(l_slots));
    window.push_back(sample_channel(rng, config));
    const PathComponent dominant = window.front().paths.front();
    for (int l = 1; l < l_slots; ++l) {
        if (config.redraw_scattered_per_slot) {
            MultipathChannel ch;
            ch.paths.reserve(static_cast<std::size_t>(config.q_paths));
            ch.paths.push_back(dominant);
            for (int q = 1; q < config.q_paths; ++q) {
                ch.paths.push_back(draw_scattered(rng, config));
            }
            window.push_back(std::move(ch));
        } else {
            window.push_back(window.front());
        }
    }
    return window;
}

std::vector<cxd> effective_channel(const MultipathChannel& channel,
                                   std::span<const cxd> w,
                                   const UlaConfig& rx, const UlaConfig& tx) {
    rx.validate();
    tx.validate();
    if (static_cast<int>(w.size()) != tx.n_elements) {
        throw std::invalid_argument("beamformer length does not match the transmit array");
    }
    std::vector<cxd> h(static_cast<std::size_t>(rx.n_elements), cxd{0.0, 0.0});
    std::vector<cxd> v, u;
    for (const auto& path : channel.paths) {
        fill_steering(v, tx.n_elements, path.aod, +1.0);
        const cxd tx_proj = kernels::cdot(v.data(), w.data(), v.size());
        const cxd scale = path.gain * tx_proj;
        if (scale == cxd{0.0, 0.0}) continue;
        fill_steering(u, rx.n_elements, path.aoa, -1.0); // conj(u(aoa))
        kernels::caxpy(scale, u.data(), h.data(), h.size());
    }
    return h;
}

double beam_gain(std::span<const cxd> w, double angle, const UlaConfig& tx) {
    tx.validate();
    check_angle(angle);
    if (static_cast<int>(w.size()) != tx.n_elements) {
        throw std::invalid_argument("beamformer length does not match the transmit array");
    }
    const double nsq = kernels::sum_abs2(w.data(), w.size());
    if (std::fabs(nsq - 1.0) > 1e-12) {
        throw std::invalid_argument("beam_gain expects a unit-norm beamformer");
    }
    std::vector<cxd> v;
    fill_steering(v, tx.n_elements, angle, +1.0);
    return std::norm(kernels::cdot(v.data(), w.data(), v.size()));
}

double mean_gain_sin_space(std::span<const cxd> w, const UlaConfig& tx) {
    tx.validate();
    const int nodes = 4 * tx.n_elements;
    std::vector<cxd> v(static_cast<std::size_t>(tx.n_elements));
    double acc = 0.0;
    for (int g = 0; g < nodes; ++g) {
        const double u = -1.0 + 2.0 * (g + 0.5) / nodes;
        const double phase = std::numbers::pi * u;
        const cxd step{std::cos(phase), std::sin(phase)};
        cxd cur{1.0, 0.0};
        for (int k = 0; k < tx.n_elements; ++k) {
            v[static_cast<std::size_t>(k)] = cur;
            cur *= step;
        }
        acc += std::norm(kernels::cdot(v.data(), w.data(), v.size()));
    }
    return acc / nodes;
}

double RsSequence::energy() const {
    return kernels::sum_abs2(samples.data(), samples.size());
}

RsSequence generate_rs(int n_s, double power, RsKind kind, std::uint64_t seed) {
    if (n_s < 2) throw std::domain_error("reference signal needs n_s >= 2");
    if (!(power > 0.0)) throw std::domain_error("transmit power must be positive");
    RsSequence rs;
    rs.power = power;
    rs.samples.resize(static_cast<std::size_t>(n_s));
    const double amp = std::sqrt(power);
    switch (kind) {
        case RsKind::qpsk: {
            RngStream rng(seed, 0x7273u); // dedicated stream tag for RS draws
            for (auto& s : rs.samples) {
                const auto q = rng.uniform_int(4);
                constexpr double inv_sqrt2 = 0.70710678118654752440;
                const double re = (q & 1) ? -inv_sqrt2 : inv_sqrt2;
                const double im = (q & 2) ? -inv_sqrt2 : inv_sqrt2;
                s = cxd{amp * re, amp * im};
            }
            break;
        }
        case RsKind::zadoff_chu: {
            // Root 1 Zadoff-Chu; odd length uses k(k+1), even uses k^2.
            for (int k = 0; k < n_s; ++k) {
                const double arg = (n_s % 2 == 1)
                                       ? -std::numbers::pi * k * (k + 1.0) / n_s
                                       : -std::numbers::pi * k * static_cast<double>(k) / n_s;
                rs.samples[static_cast<std::size_t>(k)] =
                    cxd{amp * std::cos(arg), amp * std::sin(arg)};
            }
            break;
        }
    }
    return rs;
}

int FrameConfig::n_slot() const {
    return static_cast<int>(std::lround(t_slot * sample_rate));
}

int FrameConfig::n_s() const {
    return static_cast<int>(std::lround(t_rs * sample_rate));
}

void FrameConfig::validate() const {
    if (!(t_rs > 0.0) || !(t_slot > 0.0) || !(sample_rate > 0.0)) {
        throw std::invalid_argument("frame durations and sample rate must be positive");
    }
    if (!(t_rs < t_slot)) throw std::invalid_argument("t_rs must be shorter than t_slot");
    if (n_s() < 2) throw std::invalid_argument("frame yields n_s < 2");
    if (n_s() > n_slot()) throw std::invalid_argument("frame yields n_s > n_slot");
}

ObservationWindow synthesize_observation(RngStream& rng,
                                         const std::vector<MultipathChannel>& channels,
                                         const std::vector<Beamformer>& beam_per_slot,
                                         const RsSequence& rs, double sigma_sq,
                                         Hypothesis hypothesis,
                                         const UlaConfig& rx, const UlaConfig& tx) {
    if (channels.size() != beam_per_slot.size() || channels.empty()) {
        throw std::invalid_argument("channels and beamformers must pair up per slot");
    }
    if (!(sigma_sq > 0.0)) throw std::domain_error("noise variance must be positive");

    ObservationWindow win;
    win.n_r = rx.n_elements;
    win.n_s = static_cast<int>(rs.samples.size());
    win.noise_variance = sigma_sq;
    win.blocks.reserve(channels.size());

    for (std::size_t l = 0; l < channels.size(); ++l) {
        std::vector<cxd> block(static_cast<std::size_t>(win.n_r) * win.n_s);
        for (auto& z : block) z = rng.complex_normal(sigma_sq);
        if (hypothesis == Hypothesis::h1) {
            const auto h = effective_channel(channels[l], beam_per_slot[l].w, rx, tx);
            for (int r = 0; r < win.n_r; ++r) {
                kernels::caxpy(h[static_cast<std::size_t>(r)], rs.samples.data(),
                               block.data() + static_cast<std::size_t>(r) * win.n_s,
                               static_cast<std::size_t>(win.n_s));
            }
        }
        win.blocks.push_back(std::move(block));
    }
    return win;
}

WaveformBuffer synthesize_waveform(RngStream& rng,
                                   const std::vector<MultipathChannel>& channels,
                                   const std::vector<Beamformer>& beam_per_slot,
                                   const RsSequence& rs, const FrameConfig& frame,
                                   double sigma_sq, int tau0, Hypothesis hypothesis,
                                   const UlaConfig& rx, const UlaConfig& tx) {
    frame.validate();
    if (!(sigma_sq > 0.0)) throw std::domain_error("noise variance must be positive");
    const int n_slot = frame.n_slot();
    if (tau0 < 0 || tau0 >= n_slot) {
        throw std::invalid_argument("tau0 must be a sample index in [0, n_slot)");
    }
    if (channels.size() != beam_per_slot.size() || channels.empty()) {
        throw std::invalid_argument("channels and beamformers must pair up per slot");
    }

    const auto n_bs_slots = channels.size();
    WaveformBuffer wf;
    wf.n_rx = rx.n_elements;
    wf.n_samples = (n_bs_slots + 1) * static_cast<std::size_t>(n_slot);
    wf.data.resize(static_cast<std::size_t>(wf.n_rx) * wf.n_samples);
    for (auto& z : wf.data) z = rng.complex_normal(sigma_sq);

    if (hypothesis == Hypothesis::h1) {
        const auto n_s = rs.samples.size();
        for (std::size_t l = 0; l < n_bs_slots; ++l) {
            const auto h = effective_channel(channels[l], beam_per_slot[l].w, rx, tx);
            const std::size_t base = l * static_cast<std::size_t>(n_slot) +
                                     static_cast<std::size_t>(tau0);
            if (base + n_s > wf.n_samples) break;
            for (int r = 0; r < wf.n_rx; ++r) {
                kernels::caxpy(h[static_cast<std::size_t>(r)], rs.samples.data(),
                               wf.row(r) + base, n_s);
            }
        }
    }
    return wf;
}

} // namespace mmwave
