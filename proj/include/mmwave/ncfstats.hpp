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
#include <vector>

#include "mmwave/rng.hpp"

namespace mmwave::ncf {

/// Noncentral F parameters: degrees of freedom n1, n2 and noncentrality
/// lambda. The F variate is (X1/n1)/(X2/n2) with X1 ~ chi^2_{n1}(lambda) and
/// X2 ~ chi^2_{n2}.
struct NcfParams {
    double n1;
    double n2;
    double lambda = 0.0;

    void validate() const;
};

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation. Exposed because tests and the quantile search build on it.
double betainc(double a, double b, double x);

/// CDF of the noncentral F distribution, evaluated as a Poisson-weighted
/// series of regularized incomplete beta terms summed outward from the modal
/// Poisson index. Absolute tolerance 1e-13, term cap 10^4 (numeric_error with
/// diagnostics beyond the cap).
double ncf_cdf(double x, const NcfParams& p);

/// Survival function 1 - CDF, computed on the complement series so upper-tail
/// probabilities carry no cancellation error.
double ncf_sf(double x, const NcfParams& p);

/// Inverse CDF: the x with ncf_cdf(x) = prob (|cdf - prob| <= 1e-12).
double f_quantile(double prob, const NcfParams& p);

/// The x with ncf_sf(x) = tail_prob; preferred for far upper tails.
double f_upper_quantile(double tail_prob, const NcfParams& p);

/// Detector dimensions shared by the detection-statistics routines:
/// n_r receive antennas, l slots, n_s reference-signal samples per slot.
struct DetectorDims {
    int n_r;
    int l;
    int n_s;

    double dof1() const { return 2.0 * n_r * l; }
    double dof2() const { return 2.0 * n_r * l * (n_s - 1); }
    void validate() const;
};

/// Probability that the detection statistic falls below the threshold `gamma`
/// (threshold on the unscaled statistic; the (n_s - 1) scaling to the F
/// variate is applied internally).
double miss_prob(double gamma, const DetectorDims& dims, double lambda);

/// Link parameters entering the fading-aware miss bound.
struct FadingLink {
    double p_t;
    double sigma_sq;
    int n_r;
    int l;
    int n_s;
    double gamma;
};

struct FadingBoundInput {
    std::vector<double> xi_grid;
    std::function<double(double)> quantile_fn; // xi -> lower channel-gain quantile
    FadingLink link;
};

struct FadingBound {
    double bound;
    double best_xi;
};

/// Miss-probability upper bound that splits the channel-fade event at the
/// xi-quantile of the mean channel gain and takes the best split on the grid.
FadingBound fading_upper_bound(const FadingBoundInput& input);

/// Log-spaced default grid: 60 points on [1e-5, 1 - 1e-3].
std::vector<double> default_xi_grid();

/// Empirical quantile table of a scalar statistic (here: the slot-averaged
/// channel gain) estimated from `trials` independent draws.
struct QuantileTable {
    std::vector<double> xi;
    std::vector<double> value;
    std::vector<bool> extrapolated; // xi below the 1/trials resolution

    /// Step lookup: value at the largest tabulated xi <= requested xi.
    double operator()(double xi_query) const;
};

/// Estimates the xi-quantiles of `draw` over `trials` seeded substreams.
/// Deterministic for fixed (seed, trials) regardless of `workers`.
QuantileTable channel_gain_quantile(const std::function<double(RngStream&)>& draw,
                                    const std::vector<double>& xi_values,
                                    int trials, std::uint64_t seed, int workers = 1);

} // namespace mmwave::ncf
