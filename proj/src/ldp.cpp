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

#include "mmwave/ldp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmwave/errors.hpp"

namespace mmwave::ldp {

namespace {

void check_inputs(double eta, double gamma, int n_r, int n_s) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (n_r < 1 || n_s < 2) throw std::invalid_argument("need n_r >= 1 and n_s >= 2");
}

double validity_threshold(double eta, int n_r, int n_s) {
    return (2.0 * n_r + eta) / (2.0 * n_r * (n_s - 1));
}

} // namespace

double limiting_log_mgf(double t1, double t2, double eta, int n_r, int n_s) {
    if (t1 >= 0.5 || t2 >= 0.5) return std::numeric_limits<double>::infinity();
    return eta * t1 / (1.0 - 2.0 * t1) - n_r * std::log(1.0 - 2.0 * t1) -
           n_r * (n_s - 1.0) * std::log(1.0 - 2.0 * t2);
}

double pointwise_rate(double u, double v, double eta, int n_r, int n_s) {
    check_inputs(eta, 1.0, n_r, n_s);
    if (!(u > 0.0) || !(v > 0.0)) {
        throw std::invalid_argument("pointwise rate needs positive (u, v)");
    }
    const double t1 = 0.5 - (n_r + std::sqrt(n_r * n_r + eta * u)) / (2.0 * u);
    const double t2 = 0.5 - n_r * (n_s - 1.0) / v;
    return t1 * u + t2 * v - limiting_log_mgf(t1, t2, eta, n_r, n_s);
}

RateFunctionEval rate_function(double eta, double gamma, int n_r, int n_s) {
    check_inputs(eta, gamma, n_r, n_s);
    if (gamma >= validity_threshold(eta, n_r, n_s)) {
        return RateFunctionEval{0.0, 0.0, 0.0, 0.0, 0.0, false};
    }

    const double a = (gamma + 1.0) / (eta * gamma);
    const double b = a * n_r * n_r + n_r + 2.0 * n_r * (n_s - 1.0);
    const double x = (1.0 + std::sqrt(1.0 + 4.0 * a * b)) / (2.0 * a);
    if (!(x > n_r)) {
        throw numeric_error("rate-function root x* did not exceed n_r");
    }
    const double v = (x * x - n_r * n_r) / (eta * gamma);
    const double t1 = 0.5 - (n_r + x) / (2.0 * gamma * v);
    const double t2 = 0.5 - n_r * (n_s - 1.0) / v;
    const double ratio = gamma * v / (n_r + x); // equals 1 - 2 t1 inverted
    const double value = 0.5 * eta * (1.0 - ratio) +
                         n_r * (n_s - 1.0) * std::log(2.0 * n_r * (n_s - 1.0) / v) -
                         n_r * std::log(ratio);
    return RateFunctionEval{std::max(0.0, value), x, v, t1, t2, true};
}

double rate_function_oracle(double eta, double gamma, int n_r, int n_s) {
    check_inputs(eta, gamma, n_r, n_s);
    if (gamma >= validity_threshold(eta, n_r, n_s)) return 0.0;

    const auto objective = [&](double v) {
        return pointwise_rate(gamma * v, v, eta, n_r, n_s);
    };

    double lo = 1e-6;
    double hi = 10.0 * 2.0 * n_r * (n_s - 1.0) * (1.0 + eta);
    constexpr double kInvPhi = 0.6180339887498948482;
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double fc = objective(c);
    double fd = objective(d);
    int it = 0;
    while ((hi - lo) > 1e-10 * std::max(1.0, hi) && ++it < 400) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = objective(d);
        }
    }
    if (it >= 400) throw numeric_error("rate-function oracle failed to reach tolerance");
    return objective(0.5 * (lo + hi));
}

double miss_approx(int l_slots, const RateFunctionEval& eval) {
    if (l_slots < 1) throw std::invalid_argument("miss_approx needs l_slots >= 1");
    if (!eval.valid) return 1.0;
    return std::exp(-static_cast<double>(l_slots) * eval.value);
}

DirectionLink eta_for_direction(double angle,
                                const std::function<double(double)>& avg_gain,
                                const std::function<double(double)>& pathloss,
                                const LinkBudget& link) {
    const double alpha = pathloss(angle);
    if (!(alpha > 0.0)) throw std::invalid_argument("pathloss must be positive");
    const double gain = avg_gain(angle);
    DirectionLink out;
    out.angle = angle;
    out.pathloss = alpha;
    out.avg_gain = gain;
    out.eta = 2.0 * link.p_t * link.n_r * link.n_s * gain / (alpha * link.sigma_sq);
    out.zero_gain = !(gain > 0.0);
    return out;
}

WorstDirection worst_direction_exponent(const std::function<double(double)>& avg_gain,
                                        const std::function<double(double)>& pathloss,
                                        double sector_lo, double sector_hi,
                                        double grid_step, double gamma,
                                        const LinkBudget& link) {
    if (!(sector_hi > sector_lo) || !(grid_step > 0.0)) {
        throw std::invalid_argument("worst-direction scan needs a proper sector and step");
    }
    WorstDirection worst{sector_lo, std::numeric_limits<double>::infinity(), 0.0};
    const int n = static_cast<int>(std::ceil((sector_hi - sector_lo) / grid_step));
    for (int i = 0; i <= n; ++i) {
        const double phi = std::min(sector_hi, sector_lo + i * grid_step);
        const auto dl = eta_for_direction(phi, avg_gain, pathloss, link);
        if (dl.eta < worst.eta) {
            worst.angle = phi;
            worst.eta = dl.eta;
        }
    }
    if (worst.eta > 0.0) {
        const auto eval = rate_function(worst.eta, gamma, link.n_r, link.n_s);
        worst.rate = eval.valid ? eval.value : 0.0;
    } else {
        worst.rate = 0.0;
    }
    return worst;
}

} // namespace mmwave::ldp
