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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmwave/beam_design.hpp"
#include "mmwave/glrt.hpp"

namespace mmwave::sim {

enum class Topology { open_sector, half_blocked };
enum class CodebookMethod { omni, random, cm, vm, file };
enum class SlotPolicy { optimized, equal };

/// `conditional` scores each channel draw with the exact conditional miss
/// probability (the statistic's conditional law is known in closed form);
/// `empirical` synthesizes the observation and runs the detector.
enum class Estimator { conditional, empirical };

/// `true_lag` declares a miss when the statistic at the true lag fails the
/// threshold; `full_sweep` additionally requires the swept argmax to land on
/// the true lag.
enum class Protocol { true_lag, full_sweep };

/// How the per-row fading bound column is evaluated: from the deterministic
/// dominant-path gain level, from an empirical quantile table of the mean
/// channel gain, or not at all.
enum class BoundMode { deterministic_dominant, empirical, none };

enum class Format { csv, json };

struct Scenario {
    std::string id = "scenario";
    Topology topology = Topology::open_sector;
    double sector_half_deg = 30.0;

    FrameConfig frame{5e-4, 1e-5, 1e7};
    int n_t = 32;
    int n_r = 16;

    CodebookMethod method = CodebookMethod::omni;
    int m = 1;
    double beta = 1.0;
    int j_total = 8;
    SlotPolicy slot_policy = SlotPolicy::optimized;
    std::string codebook_path;
    std::uint64_t design_seed = 1;
    beam::SynthesisConfig synthesis;

    double p_fa = 0.001;
    std::vector<int> l_list{10};

    int q_paths = 6;
    double dominant_ratio_db = 13.2;
    std::vector<double> snr_rs_db{-23.0};
    double p_t = 1.0;
    double sigma_sq = 1.0;
    RsKind rs_kind = RsKind::qpsk;

    long trials = 20000;
    std::uint64_t master_seed = 1;
    Estimator estimator = Estimator::conditional;
    Protocol protocol = Protocol::true_lag;
    BoundMode bound_mode = BoundMode::deterministic_dominant;
    int bound_trials = 100000;

    void validate() const; // throws config_error
    double sector_lo() const;
    double sector_hi() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
Scenario scenario_from_file(const std::filesystem::path& path);

struct ResultRow {
    std::string scenario_id;
    int l;
    std::string condition;
    double p_miss;
    double ci_lo;
    double ci_hi;
    double lemma1_bound;
    double ldp_approx;
    long trials;
    std::uint64_t seed;
};

/// Builds the scenario's codebook (synthesizing beams if needed) with the
/// per-antenna power constraint applied.
struct PreparedCodebook {
    beam::Codebook codebook;
    std::vector<Beamformer> slot_sequence; // beta-scaled, one entry per slot
    std::string method_label;
};
PreparedCodebook prepare_codebook(const Scenario& scenario);

/// Pathloss profile for the scenario topology with reference level
/// alpha_ref; the blocked half of the half-blocked topology uses alpha_ref/2.
beam::PathlossProfile scenario_pathloss(const Scenario& scenario, double alpha_ref);

/// Reference pathloss for one condition: alpha_ref = p_t / (sigma^2 snr_rs).
double alpha_ref_for_snr(const Scenario& scenario, double snr_rs_db);

/// Full pipeline sweep over (condition, L). Deterministic for a fixed master
/// seed, independent of the worker count.
std::vector<ResultRow> run_miss_sweep(const Scenario& scenario, int workers = 1);

/// H0 lag sweeps: reports the fraction of sweeps with at least one false
/// decision (p_miss column) against the union-bound target p_fa.
ResultRow run_fa_calibration(const Scenario& scenario, int workers = 1);

void emit_results(const std::vector<ResultRow>& rows, Format format,
                  const std::filesystem::path& path);
std::vector<ResultRow> parse_results(Format format, const std::filesystem::path& path);

} // namespace mmwave::sim
