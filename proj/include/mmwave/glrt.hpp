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

#include <vector>

#include "mmwave/ncfstats.hpp"
#include "mmwave/signal_model.hpp"

namespace mmwave {

/// Detection statistic together with the ML plug-in estimates it is built
/// from. `statistic` is the ratio of reference-signal energy to residual
/// energy; a window that matches the signal subspace exactly (zero residual)
/// is reported as +inf with `degenerate` set.
struct GlrtResult {
    double statistic;
    std::vector<cxd> h_hat; // stacked per-slot effective-channel estimate
    double sigma0_sq;
    double sigma1_sq;
    bool degenerate;
};

struct MlEstimates {
    std::vector<cxd> h_hat;
    double sigma0_sq;
    double sigma1_sq;
};

MlEstimates ml_estimates(const ObservationWindow& window, const RsSequence& rs);

GlrtResult glrt_statistic(const ObservationWindow& window, const RsSequence& rs);

/// False-alarm budget: the per-sweep target is split uniformly over the
/// n_slot candidate lags.
struct ThresholdSpec {
    double p_fa;
    int n_slot;
};

/// Threshold on the unscaled statistic such that a single pure-noise test
/// exceeds it with probability p_fa / n_slot.
double threshold_for_pfa(const ThresholdSpec& target, const ncf::DetectorDims& dims);

struct SweepEntry {
    int lag;
    double statistic;
    bool decision;
    bool degenerate;
};

/// Runs the test at every candidate lag in [0, n_slot). Entries are ordered
/// by lag. The waveform must span at least (l_slots + 1) slots.
std::vector<SweepEntry> detect_sweep(const WaveformBuffer& waveform,
                                     const RsSequence& rs, double gamma,
                                     const FrameConfig& frame, int l_slots);

} // namespace mmwave
