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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmwave/signal_model.hpp"

namespace mmwave::beam {

/// Angular interval in radians. All averaging over angles is done in
/// u = sin(angle) space, where the array's Fourier modes are orthonormal and
/// the energy-conservation budget is exactly achievable.
struct AngularInterval {
    double lo;
    double hi;

    double sin_measure() const; // sin(hi) - sin(lo)
    bool contains(double angle) const { return angle >= lo && angle <= hi; }
    void validate() const;
};

/// Sector pathloss profile and its sin-space mean.
struct PathlossProfile {
    AngularInterval sector;
    std::function<double(double)> alpha;
    double mean_alpha = 0.0;

    static PathlossProfile constant(AngularInterval sector, double alpha);
    /// Piecewise-constant profile; `breaks` are the interior boundaries and
    /// `values` has one entry per piece (breaks.size() + 1). Means are exact.
    static PathlossProfile piecewise(AngularInterval sector,
                                     std::vector<double> breaks,
                                     std::vector<double> values);
    static PathlossProfile from_function(AngularInterval sector,
                                         std::function<double(double)> alpha,
                                         int quad_points = 8192);

    double mean_alpha_over(const AngularInterval& part) const;
};

/// Link parameters that convert a target data rate into a pathloss estimate.
struct RateLink {
    double rho;     // downlink resource fraction
    double w_total; // data bandwidth, Hz
    double w_rs;    // reference-signal bandwidth, Hz
    double p_t;
    double sigma_sq;
    double g_t_max;
    double g_r_max;
};

/// alpha(phi) = (p_t/sigma^2) (g_t_max g_r_max / snr_th(phi)) (w_rs/w_total)
/// with snr_th solving rate = rho W log2(1 + snr).
PathlossProfile pathloss_from_rate(const std::function<double(double)>& rate_target,
                                   const RateLink& link, AngularInterval sector,
                                   int quad_points = 8192);

double snr_for_rate(double rate_target, const RateLink& link);

/// Disjoint subintervals covering the sector, with the per-piece gain factor
/// kappa (sin-space, 2 / |part|_u) and sin-space mean pathloss.
struct SectorPartition {
    std::vector<AngularInterval> parts;
    std::vector<double> kappa;
    std::vector<double> mean_alpha;

    static SectorPartition equal_angle(const PathlossProfile& profile, int m);
    /// Pieces of equal sin-space measure; keeps the per-piece gain factors
    /// exactly equal on a uniform profile.
    static SectorPartition equal_sin(const PathlossProfile& profile, int m);
    static SectorPartition from_boundaries(const PathlossProfile& profile,
                                           std::vector<double> interior_bounds);
};

using TargetGain = std::function<double(double)>;

/// Per-subinterval desirable patterns kappa_m alpha(phi)/mean_alpha_m inside
/// the piece and zero outside. Each integrates to the full unit energy budget
/// in sin space.
std::vector<TargetGain> desired_pattern(const PathlossProfile& profile,
                                        const SectorPartition& partition);

/// Slots per beam, proportional to |part|_u * mean_alpha_m, rounded by
/// largest remainder (ties toward the piece with larger mean pathloss).
std::vector<int> slot_allocation(const SectorPartition& partition,
                                 const PathlossProfile& profile, int j_total);

enum class BeamKind { cm, vm };

struct SynthesisReport {
    double mismatch;
    double min_in_band_gain;
    double max_leakage;
    BeamKind kind;
    bool stagnated;
};

struct SynthesisConfig {
    double grid_step_deg = 0.25;
    double in_band_weight = 1.0;
    double out_of_band_weight = 2.0;
    /// Don't-care margin just outside the band, in sin space; a finite array
    /// cannot realize a brick-wall edge, so the transition lives here instead
    /// of eating into the band. Negative selects the default 2/n_t.
    double transition_sin = -1.0;
    /// Extra multiplier on in-band points that fall short of the target; the
    /// worst covered direction dominates detection performance, so dips cost
    /// more than overshoot. The reported mismatch stays the plain weighted L2.
    double undershoot_weight = 32.0;
    int population = 64;
    int generations = 500;
    int stall_limit = 60; // generations without improvement before a shake-up
    std::uint64_t seed = 1;
};

/// Phase-only (constant-modulus) synthesis: |w_n| = 1/sqrt(n_t), phases
/// minimize the weighted amplitude mismatch to sqrt(target) on the grid.
std::pair<Beamformer, SynthesisReport> synthesize_cm(const TargetGain& target,
                                                     AngularInterval band, int n_t,
                                                     const SynthesisConfig& config);

/// Phase-and-magnitude synthesis with the magnitude profile mirror-symmetric
/// about the array center; ||w|| = 1 by construction.
std::pair<Beamformer, SynthesisReport> synthesize_vm(const TargetGain& target,
                                                     AngularInterval band, int n_t,
                                                     const SynthesisConfig& config);

/// Beamformers plus their slot counts within one scan period.
struct Codebook {
    std::vector<Beamformer> beams;
    std::vector<int> slots;

    int period() const;
    void validate() const;
};

/// One i.i.d. random unit-norm beamformer per slot (baseline scheme).
Codebook random_codebook(RngStream& rng, int n_t, int j_total);

/// Single omnidirectional beam (first element only) for all slots.
Codebook omni_codebook(int n_t, int j_total);

/// Uniform scaling so max_n |w_n|^2 <= beta while ||w||^2 <= 1. Returns the
/// scaled weights and the realized total-power fraction ||w_scaled||^2.
std::pair<Beamformer, double> apply_power_constraint(const Beamformer& w, double beta,
                                                     int n_t);

/// Slot-weighted average gain (1/J) sum_m J_m |v(angle) . w_m|^2. Works for
/// power-constrained (sub-unit-norm) members as well.
double avg_codebook_gain(const Codebook& codebook, double angle, const UlaConfig& tx);

/// FNV-1a hash of the profile sampled on a fixed grid; stored with codebooks
/// so a codebook file can be matched to the profile it was designed for.
std::string target_profile_hash(const PathlossProfile& profile);

struct CodebookMeta {
    std::string method; // "cm", "vm", "random", "omni"
    int m = 1;
    std::string target_profile_hash;
};

void save_codebook(const Codebook& codebook, const CodebookMeta& meta,
                   const std::filesystem::path& path);
std::pair<Codebook, CodebookMeta> load_codebook(const std::filesystem::path& path);

} // namespace mmwave::beam
