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

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "mmwave/rng.hpp"

namespace mmwave {

using cxd = std::complex<double>;

/// Uniform linear array with half-wavelength element spacing.
struct UlaConfig {
    int n_elements;
    double spacing = 0.5; // in wavelengths

    void validate() const;
};

/// Steering vector [1, e^{j pi sin(angle)}, ..., e^{j pi (N-1) sin(angle)}].
/// The angle must lie in [-pi/2, pi/2], the unambiguous range of the array.
std::vector<cxd> steering_vector(const UlaConfig& array, double angle);

/// Unit-norm transmit weight vector. apply_power_constraint may produce
/// deliberately sub-unit norms; everything else keeps ||w|| = 1.
struct Beamformer {
    std::vector<cxd> w;

    double norm_sq() const;
};

struct PathComponent {
    cxd gain;
    double aoa; // radians, [-pi/2, pi/2]
    double aod; // radians, [-pi/2, pi/2]
};

struct MultipathChannel {
    std::vector<PathComponent> paths;
};

/// Channel law: one dominant path of deterministic magnitude (random phase,
/// fixed AoA/AoD across the observation window) plus q_paths - 1 scattered
/// paths with i.i.d. complex Gaussian gains and uniformly random angles.
/// Total expected path energy is 1/pathloss; the dominant-to-scattered energy
/// ratio is dominant_ratio_db.
struct ChannelConfig {
    int q_paths = 6;
    double dominant_aod = 0.0;
    double dominant_ratio_db = 13.2;
    double pathloss = 1.0; // alpha; channel energy = 1/alpha
    double scatter_aod_lo = -1.5707963267948966;
    double scatter_aod_hi = 1.5707963267948966;
    double aoa_lo = -1.5707963267948966;
    double aoa_hi = 1.5707963267948966;
    bool redraw_scattered_per_slot = true;

    void validate() const;
    double dominant_power() const;     // |g_1|^2
    double scattered_power_per_path() const;
};

/// One channel realization.
MultipathChannel sample_channel(RngStream& rng, const ChannelConfig& config);

/// A window of l_slots realizations sharing the dominant path; scattered
/// components are redrawn per slot when the config says so.
std::vector<MultipathChannel> sample_channel_window(RngStream& rng,
                                                    const ChannelConfig& config,
                                                    int l_slots);

/// Effective receive-side channel sum_q g_q conj(u(aoa_q)) (v(aod_q) . w).
std::vector<cxd> effective_channel(const MultipathChannel& channel,
                                   std::span<const cxd> w,
                                   const UlaConfig& rx, const UlaConfig& tx);

/// Transmit gain |v(angle) . w|^2 of a unit-norm beamformer; in [0, N_T].
double beam_gain(std::span<const cxd> w, double angle, const UlaConfig& tx);

/// Exact sin-space average of |v(u) . w|^2 over u in [-1, 1] (rectangle rule
/// on the trigonometric polynomial, exact for >= 2 N_T - 1 nodes). Equals
/// ||w||^2 for any w.
double mean_gain_sin_space(std::span<const cxd> w, const UlaConfig& tx);

enum class RsKind { qpsk, zadoff_chu };

/// Reference-signal sequence with ||s||^2 = n_s * power exactly.
struct RsSequence {
    std::vector<cxd> samples;
    double power;

    double energy() const; // ||s||^2
};

RsSequence generate_rs(int n_s, double power, RsKind kind, std::uint64_t seed);

/// Slot/frame timing; lag values are sample indices in [0, n_slot).
struct FrameConfig {
    double t_slot;
    double t_rs;
    double sample_rate;

    int n_slot() const;
    int n_s() const;
    void validate() const;
};

enum class Hypothesis { h0, h1 };

/// Stacked received blocks (one per slot), each n_r x n_s row-major.
struct ObservationWindow {
    std::vector<std::vector<cxd>> blocks;
    int n_r = 0;
    int n_s = 0;
    double noise_variance = 0.0; // generator-side bookkeeping only
};

/// Synthesizes the observation at the true lag: block l is h_l s^T + Z_l
/// under h1 and pure noise under h0. Noise entries are i.i.d. circular
/// complex Gaussian with variance sigma_sq per complex entry.
ObservationWindow synthesize_observation(RngStream& rng,
                                         const std::vector<MultipathChannel>& channels,
                                         const std::vector<Beamformer>& beam_per_slot,
                                         const RsSequence& rs, double sigma_sq,
                                         Hypothesis hypothesis,
                                         const UlaConfig& rx, const UlaConfig& tx);

/// Long multi-slot waveform for lag sweeps, row-major [rx][sample].
struct WaveformBuffer {
    int n_rx = 0;
    std::size_t n_samples = 0;
    std::vector<cxd> data;

    cxd* row(int r) { return data.data() + static_cast<std::size_t>(r) * n_samples; }
    const cxd* row(int r) const {
        return data.data() + static_cast<std::size_t>(r) * n_samples;
    }
};

/// Noise-filled waveform of (l_slots + 1) slots; under h1 the reference
/// signal enters at offset tau0 of every slot with the per-slot effective
/// channels.
WaveformBuffer synthesize_waveform(RngStream& rng,
                                   const std::vector<MultipathChannel>& channels,
                                   const std::vector<Beamformer>& beam_per_slot,
                                   const RsSequence& rs, const FrameConfig& frame,
                                   double sigma_sq, int tau0, Hypothesis hypothesis,
                                   const UlaConfig& rx, const UlaConfig& tx);

} // namespace mmwave
