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

#include "mmwave/ncfstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "mmwave/errors.hpp"

namespace mmwave::ncf {

namespace {

constexpr int kMaxSeriesTerms = 10000;
constexpr double kSeriesTol = 1e-13;

double betacf(double a, double b, double x) {
    // Lentz continued fraction for the incomplete beta function.
    constexpr int kMaxIter = 500;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    int m = 1;
    for (; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    if (m > kMaxIter) {
        throw numeric_error("betainc continued fraction did not converge");
    }
    return h;
}

struct SeriesState {
    double a, b, y;
    double half_lambda;
};

// log of the beta-difference term T_j = y^{a+j} (1-y)^b G(a+j+b)/(G(a+j+1)G(b)),
// satisfying I_y(a+j+1, b) = I_y(a+j, b) - T_j.
double log_term(const SeriesState& s, int j) {
    const double aj = s.a + j;
    return std::lgamma(aj + s.b) - std::lgamma(aj + 1.0) - std::lgamma(s.b) +
           aj * std::log(s.y) + s.b * std::log1p(-s.y);
}

double log_poisson(double half_lambda, int j) {
    return -half_lambda + j * std::log(half_lambda) - std::lgamma(j + 1.0);
}

// Shared Poisson-mixture evaluator. `lower` selects the CDF (I terms) vs the
// survival function (1 - I terms); the recurrences mirror each other.
double ncf_mixture(double x, const NcfParams& p, bool lower) {
    p.validate();
    if (x <= 0.0) return lower ? 0.0 : 1.0;
    if (!std::isfinite(x)) return lower ? 1.0 : 0.0;

    const double a = 0.5 * p.n1;
    const double b = 0.5 * p.n2;
    const double y = p.n1 * x / (p.n1 * x + p.n2);

    if (p.lambda == 0.0) {
        const double i0 = betainc(a, b, y);
        return lower ? i0 : betainc(b, a, 1.0 - y);
    }

    const SeriesState s{a, b, y, 0.5 * p.lambda};
    const double delta = s.half_lambda;
    const int m = static_cast<int>(std::floor(delta));

    // The Poisson weights concentrate on delta +- O(sqrt(delta)); outside an
    // 8.5-sigma window the missed mass is below 3e-16. When the beta factor at
    // the window edge is already negligible, the whole mixture is.
    int j_min = 0;
    if (delta > 40.0) {
        const double sd = std::sqrt(delta);
        j_min = static_cast<int>(std::max(0.0, std::floor(delta - 8.5 * sd - 20.0)));
        const int j_top = static_cast<int>(std::ceil(delta + 8.5 * sd + 20.0));
        if (lower) {
            // I_y(a + j, b) decreases in j: the whole sum is at most the edge value
            if (betainc(a + j_min, b, y) + 3e-16 < kSeriesTol) return 0.0;
        } else {
            if (betainc(b, a + j_top, 1.0 - y) + 3e-16 < kSeriesTol) return 0.0;
        }
    }

    double base = lower ? betainc(a + m, b, y) : betainc(b, a + m, 1.0 - y);
    const double wm = std::exp(log_poisson(delta, m));
    const double tm = std::exp(log_term(s, m));

    double sum = wm * base;
    int terms = 1;
    const auto cap_error = [&](const char* where) {
        std::ostringstream msg;
        msg << "noncentral F series cap reached on the " << where << " sweep (terms="
            << terms << ", lambda=" << p.lambda << ", partial sum=" << sum << ")";
        throw numeric_error(msg.str());
    };

    // upward sweep: j = m+1, m+2, ...; I terms shrink, survival terms grow to 1
    {
        double w = wm, t = tm, ij = base;
        for (int j = m + 1;; ++j) {
            w *= delta / j;
            ij = lower ? std::max(0.0, ij - t) : std::min(1.0, ij + t);
            t *= s.y * (s.a + s.b + j - 1.0) / (s.a + j);
            sum += w * ij;
            if (++terms >= kMaxSeriesTerms) cap_error("upward");
            if (j + 1 > delta) {
                // geometric bound on the remaining Poisson mass
                const double rho = delta / (j + 1.0);
                const double rem_mass = w * rho / (1.0 - rho);
                const double rem = rem_mass * (lower ? ij : 1.0);
                if (rem < 0.5 * kSeriesTol) break;
            }
        }
    }

    // downward sweep: j = m-1, ..., j_min; I terms grow to 1, survival shrinks
    if (m > j_min) {
        double w = wm, t = tm, ij = base;
        for (int j = m - 1; j >= j_min; --j) {
            w *= (j + 1.0) / delta;
            t *= (s.a + j + 1.0) / (s.y * (s.a + s.b + j));
            ij = lower ? std::min(1.0, ij + t) : std::max(0.0, ij - t);
            sum += w * ij;
            if (++terms >= kMaxSeriesTerms) cap_error("downward");
            if (j > 0 && j < delta) {
                const double rho = j / delta;
                const double rem_mass = w * rho / (1.0 - rho);
                const double rem = rem_mass * (lower ? 1.0 : ij);
                if (rem < 0.5 * kSeriesTol) break;
            }
        }
    }

    return std::clamp(sum, 0.0, 1.0);
}

// Expanding-bracket bisection on a monotone function of x > 0.
template <typename F>
double invert_monotone(F f, double target, bool increasing) {
    double lo = 0.0;
    double hi = 1.0;
    const auto above = [&](double v) { return increasing ? v >= target : v <= target; };
    int guard = 0;
    while (!above(f(hi))) {
        lo = hi;
        hi *= 4.0;
        if (++guard > 600) throw numeric_error("quantile bracketing failed to enclose target");
    }
    double flo_known = false;
    for (int it = 0; it < 240; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double v = f(mid);
        if (std::fabs(v - target) <= 1e-13 * std::max(1.0, std::fabs(target)) &&
            (hi - lo) <= 1e-12 * std::max(1.0, mid)) {
            return mid;
        }
        if (above(v)) {
            hi = mid;
        } else {
            lo = mid;
            flo_known = true;
        }
    }
    (void)flo_known;
    return 0.5 * (lo + hi);
}

} // namespace

void NcfParams::validate() const {
    if (!(n1 > 0.0) || !(n2 > 0.0)) {
        throw std::invalid_argument("F degrees of freedom must be positive");
    }
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("noncentrality must be nonnegative");
    }
}

void DetectorDims::validate() const {
    if (n_r < 1 || l < 1 || n_s < 2) {
        throw std::invalid_argument("detector dims require n_r >= 1, l >= 1, n_s >= 2");
    }
}

double betainc(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("betainc requires positive shape parameters");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double ncf_cdf(double x, const NcfParams& p) { return ncf_mixture(x, p, true); }

double ncf_sf(double x, const NcfParams& p) { return ncf_mixture(x, p, false); }

double f_quantile(double prob, const NcfParams& p) {
    p.validate();
    if (!(prob > 0.0 && prob < 1.0)) {
        throw std::invalid_argument("quantile probability must lie in (0, 1)");
    }
    return invert_monotone([&](double x) { return ncf_cdf(x, p); }, prob, true);
}

double f_upper_quantile(double tail_prob, const NcfParams& p) {
    p.validate();
    if (!(tail_prob > 0.0 && tail_prob < 1.0)) {
        throw std::invalid_argument("tail probability must lie in (0, 1)");
    }
    return invert_monotone([&](double x) { return ncf_sf(x, p); }, tail_prob, false);
}

double miss_prob(double gamma, const DetectorDims& dims, double lambda) {
    dims.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return ncf_cdf((dims.n_s - 1) * gamma, NcfParams{dims.dof1(), dims.dof2(), lambda});
}

FadingBound fading_upper_bound(const FadingBoundInput& input) {
    if (input.xi_grid.empty()) {
        throw std::invalid_argument("fading bound needs a nonempty xi grid");
    }
    const auto& lk = input.link;
    const DetectorDims dims{lk.n_r, lk.l, lk.n_s};
    FadingBound best{std::numeric_limits<double>::infinity(), 0.0};
    for (double xi : input.xi_grid) {
        if (!(xi > 0.0 && xi < 1.0)) {
            throw std::invalid_argument("xi grid values must lie in (0, 1)");
        }
        const double h_lo = input.quantile_fn(xi);
        const double eta_lo = 2.0 * lk.p_t * lk.n_s * h_lo / lk.sigma_sq;
        const double term = xi + (1.0 - xi) * miss_prob(lk.gamma, dims, lk.l * eta_lo);
        if (term < best.bound) best = {term, xi};
    }
    best.bound = std::min(best.bound, 1.0);
    return best;
}

std::vector<double> default_xi_grid() {
    constexpr int kPoints = 60;
    const double lo = std::log(1e-5);
    const double hi = std::log(1.0 - 1e-3);
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
    }
    return grid;
}

double QuantileTable::operator()(double xi_query) const {
    if (xi.empty()) throw std::invalid_argument("empty quantile table");
    auto it = std::upper_bound(xi.begin(), xi.end(), xi_query);
    const std::size_t idx = (it == xi.begin()) ? 0 : (it - xi.begin() - 1);
    return value[idx];
}

QuantileTable channel_gain_quantile(const std::function<double(RngStream&)>& draw,
                                    const std::vector<double>& xi_values,
                                    int trials, std::uint64_t seed, int workers) {
    if (trials < 1) throw std::invalid_argument("quantile estimation needs trials >= 1");
    std::vector<double> samples(static_cast<std::size_t>(trials));

    const int n_workers = std::max(1, workers);
    if (n_workers == 1) {
        for (int i = 0; i < trials; ++i) {
            RngStream rng(seed, static_cast<std::uint64_t>(i));
            samples[i] = draw(rng);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < trials; i += n_workers) {
                    RngStream rng(seed, static_cast<std::uint64_t>(i));
                    samples[i] = draw(rng);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    std::sort(samples.begin(), samples.end());

    QuantileTable table;
    table.xi = xi_values;
    std::sort(table.xi.begin(), table.xi.end());
    table.value.reserve(table.xi.size());
    table.extrapolated.reserve(table.xi.size());
    for (double xi : table.xi) {
        if (!(xi > 0.0 && xi < 1.0)) {
            throw std::invalid_argument("requested quantiles must lie in (0, 1)");
        }
        // Lower empirical order statistic: keeps the split event's probability
        // at or below xi, which preserves the bound direction.
        const auto rank = static_cast<std::int64_t>(std::ceil(xi * trials)) - 1;
        const auto idx = static_cast<std::size_t>(std::clamp<std::int64_t>(rank, 0, trials - 1));
        table.value.push_back(samples[idx]);
        table.extrapolated.push_back(xi < 1.0 / trials);
    }
    return table;
}

} // namespace mmwave::ncf
