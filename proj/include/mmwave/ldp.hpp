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

#include <functional>

namespace mmwave::ldp {

/// Exponential decay rate of the miss probability in the number of slots,
/// with the optimizer internals kept for cross-checks. `valid` is false when
/// the threshold sits at or above the statistic's mean drift, in which case
/// the rate is zero and the miss probability does not decay.
struct RateFunctionEval {
    double value;
    double x_star;
    double v_star;
    double t1_star;
    double t2_star;
    bool valid;
};

/// Closed-form rate: x* is the positive root of
/// (gamma+1)/(eta gamma) (x^2 - n_r^2) - x - n_r - 2 n_r (n_s - 1) = 0,
/// v* = (x*^2 - n_r^2)/(eta gamma), and the value follows from the
/// stationary tilt pair (t1*, t2*).
RateFunctionEval rate_function(double eta, double gamma, int n_r, int n_s);

/// Numerical reference: minimizes the pointwise two-variable rate along the
/// decision boundary u = gamma v by golden-section search. Agrees with the
/// closed form to 1e-6 relative on valid inputs.
double rate_function_oracle(double eta, double gamma, int n_r, int n_s);

/// Legendre transform value I_L(u, v) at the optimal tilts for that (u, v).
double pointwise_rate(double u, double v, double eta, int n_r, int n_s);

/// Limiting scaled log-MGF of the per-slot energy pair; +inf outside
/// t1, t2 < 1/2.
double limiting_log_mgf(double t1, double t2, double eta, int n_r, int n_s);

/// exp(-L I*) when the rate is valid, 1 otherwise.
double miss_approx(int l_slots, const RateFunctionEval& eval);

/// Direction-resolved link figure of merit.
struct DirectionLink {
    double angle;
    double pathloss;
    double avg_gain;
    double eta;
    bool zero_gain;
};

struct LinkBudget {
    double p_t;
    double sigma_sq;
    int n_r;
    int n_s;
};

/// eta(angle) = 2 p_t n_r n_s G(angle) / (pathloss(angle) sigma^2).
DirectionLink eta_for_direction(double angle,
                                const std::function<double(double)>& avg_gain,
                                const std::function<double(double)>& pathloss,
                                const LinkBudget& link);

struct WorstDirection {
    double angle;
    double eta;
    double rate;
};

/// Scans the sector on a uniform angle grid and returns the minimum eta with
/// its rate; this caps the achievable decay exponent of the sector-averaged
/// miss probability.
WorstDirection worst_direction_exponent(const std::function<double(double)>& avg_gain,
                                        const std::function<double(double)>& pathloss,
                                        double sector_lo, double sector_hi,
                                        double grid_step, double gamma,
                                        const LinkBudget& link);

} // namespace mmwave::ldp
