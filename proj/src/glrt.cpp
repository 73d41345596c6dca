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

#include "mmwave/glrt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmwave/kernels.hpp"

namespace mmwave {

namespace {

void check_window(const ObservationWindow& window, const RsSequence& rs) {
    if (window.blocks.empty() || window.n_r < 1) {
        throw std::invalid_argument("observation window has no blocks");
    }
    if (window.n_s < 2) {
        throw std::invalid_argument("the statistic needs n_s >= 2 samples per block");
    }
    if (static_cast<int>(rs.samples.size()) != window.n_s) {
        throw std::invalid_argument("reference-signal length does not match the window");
    }
    for (const auto& block : window.blocks) {
        if (block.size() != static_cast<std::size_t>(window.n_r) * window.n_s) {
            throw std::invalid_argument("observation blocks must share one shape");
        }
    }
}

struct EnergySplit {
    double rs_energy;    // sum_l ||Y_l s*||^2 / ||s||^2
    double total_energy; // sum_l ||Y_l||_F^2
    std::vector<cxd> h_hat;
};

EnergySplit split_energies(const ObservationWindow& window, const RsSequence& rs) {
    const double s_energy = rs.energy();
    EnergySplit out{0.0, 0.0, {}};
    out.h_hat.reserve(window.blocks.size() * static_cast<std::size_t>(window.n_r));
    for (const auto& block : window.blocks) {
        for (int r = 0; r < window.n_r; ++r) {
            const cxd* row = block.data() + static_cast<std::size_t>(r) * window.n_s;
            const cxd corr = kernels::cdot_conj(row, rs.samples.data(),
                                                static_cast<std::size_t>(window.n_s));
            out.rs_energy += std::norm(corr) / s_energy;
            out.h_hat.push_back(corr / s_energy);
        }
        out.total_energy +=
            kernels::sum_abs2(block.data(), block.size());
    }
    return out;
}

} // namespace

MlEstimates ml_estimates(const ObservationWindow& window, const RsSequence& rs) {
    check_window(window, rs);
    auto split = split_energies(window, rs);
    const double n_total = static_cast<double>(window.n_r) * window.n_s *
                           static_cast<double>(window.blocks.size());
    MlEstimates est;
    est.h_hat = std::move(split.h_hat);
    est.sigma0_sq = split.total_energy / n_total;
    est.sigma1_sq = std::max(0.0, (split.total_energy - split.rs_energy) / n_total);
    return est;
}

GlrtResult glrt_statistic(const ObservationWindow& window, const RsSequence& rs) {
    check_window(window, rs);
    auto split = split_energies(window, rs);
    const double n_total = static_cast<double>(window.n_r) * window.n_s *
                           static_cast<double>(window.blocks.size());
    const double residual = std::max(0.0, split.total_energy - split.rs_energy);

    GlrtResult res;
    res.h_hat = std::move(split.h_hat);
    res.sigma0_sq = split.total_energy / n_total;
    res.sigma1_sq = residual / n_total;
    if (residual <= 0.0) {
        res.statistic = split.rs_energy > 0.0
                            ? std::numeric_limits<double>::infinity()
                            : 0.0;
        res.degenerate = split.rs_energy > 0.0;
    } else {
        res.statistic = split.rs_energy / residual;
        res.degenerate = false;
    }
    return res;
}

double threshold_for_pfa(const ThresholdSpec& target, const ncf::DetectorDims& dims) {
    dims.validate();
    if (target.n_slot < 1) throw std::invalid_argument("n_slot must be >= 1");
    const double per_test = target.p_fa / target.n_slot;
    if (!(per_test > 0.0 && per_test < 1.0)) {
        throw std::invalid_argument("p_fa / n_slot must lie in (0, 1)");
    }
    const double x = ncf::f_upper_quantile(per_test,
                                           ncf::NcfParams{dims.dof1(), dims.dof2(), 0.0});
    return x / (dims.n_s - 1);
}

std::vector<SweepEntry> detect_sweep(const WaveformBuffer& waveform,
                                     const RsSequence& rs, double gamma,
                                     const FrameConfig& frame, int l_slots) {
    frame.validate();
    if (l_slots < 1) throw std::invalid_argument("sweep needs l_slots >= 1");
    const int n_slot = frame.n_slot();
    const auto n_s = rs.samples.size();
    if (static_cast<int>(n_s) != frame.n_s()) {
        throw std::invalid_argument("reference-signal length does not match the frame");
    }
    const std::size_t needed =
        (static_cast<std::size_t>(l_slots) + 1) * static_cast<std::size_t>(n_slot);
    if (waveform.n_samples < needed) {
        throw std::length_error("waveform too short for the requested sweep");
    }

    const double s_energy = rs.energy();
    std::vector<SweepEntry> entries;
    entries.reserve(static_cast<std::size_t>(n_slot));
    for (int tau = 0; tau < n_slot; ++tau) {
        double rs_energy = 0.0;
        double total = 0.0;
        for (int l = 0; l < l_slots; ++l) {
            const std::size_t base = static_cast<std::size_t>(l) * n_slot +
                                     static_cast<std::size_t>(tau);
            for (int r = 0; r < waveform.n_rx; ++r) {
                const cxd* row = waveform.row(r) + base;
                const cxd corr = kernels::cdot_conj(row, rs.samples.data(), n_s);
                rs_energy += std::norm(corr) / s_energy;
                total += kernels::sum_abs2(row, n_s);
            }
        }
        const double residual = std::max(0.0, total - rs_energy);
        SweepEntry e;
        e.lag = tau;
        e.degenerate = residual <= 0.0 && rs_energy > 0.0;
        e.statistic = e.degenerate ? std::numeric_limits<double>::infinity()
                                   : (residual > 0.0 ? rs_energy / residual : 0.0);
        e.decision = e.statistic > gamma;
        entries.push_back(e);
    }
    return entries;
}

} // namespace mmwave
