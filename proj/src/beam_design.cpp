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

#include "mmwave/beam_design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "mmwave/errors.hpp"
#include "mmwave/kernels.hpp"

namespace mmwave::beam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

} // namespace

double AngularInterval::sin_measure() const { return std::sin(hi) - std::sin(lo); }

void AngularInterval::validate() const {
    if (!(lo >= -kHalfPi && hi <= kHalfPi && hi > lo)) {
        throw std::invalid_argument("angular interval must be a proper subset of [-pi/2, pi/2]");
    }
}

PathlossProfile PathlossProfile::constant(AngularInterval sector, double alpha) {
    sector.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("pathloss must be positive");
    PathlossProfile p;
    p.sector = sector;
    p.alpha = [alpha](double) { return alpha; };
    p.mean_alpha = alpha;
    return p;
}

PathlossProfile PathlossProfile::piecewise(AngularInterval sector,
                                           std::vector<double> breaks,
                                           std::vector<double> values) {
    sector.validate();
    if (values.size() != breaks.size() + 1) {
        throw std::invalid_argument("piecewise profile needs one value per piece");
    }
    for (double v : values) {
        if (!(v > 0.0)) throw std::invalid_argument("pathloss must be positive");
    }
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (breaks[i] <= sector.lo || breaks[i] >= sector.hi ||
            (i + 1 < breaks.size() && breaks[i] >= breaks[i + 1])) {
            throw std::invalid_argument("piecewise breaks must be increasing interior points");
        }
    }
    PathlossProfile p;
    p.sector = sector;
    p.alpha = [breaks, values](double phi) {
        std::size_t k = 0;
        while (k < breaks.size() && phi > breaks[k]) ++k;
        return values[k];
    };
    // Exact sin-space mean over the pieces.
    double acc = 0.0;
    double lo = sector.lo;
    for (std::size_t k = 0; k <= breaks.size(); ++k) {
        const double hi = (k < breaks.size()) ? breaks[k] : sector.hi;
        acc += values[k] * (std::sin(hi) - std::sin(lo));
        lo = hi;
    }
    p.mean_alpha = acc / sector.sin_measure();
    return p;
}

PathlossProfile PathlossProfile::from_function(AngularInterval sector,
                                               std::function<double(double)> alpha,
                                               int quad_points) {
    sector.validate();
    if (quad_points < 16) throw std::invalid_argument("too few quadrature points");
    PathlossProfile p;
    p.sector = sector;
    p.alpha = std::move(alpha);
    const double u_lo = std::sin(sector.lo);
    const double u_hi = std::sin(sector.hi);
    double acc = 0.0;
    for (int i = 0; i < quad_points; ++i) {
        const double u = u_lo + (u_hi - u_lo) * (i + 0.5) / quad_points;
        acc += p.alpha(std::asin(u));
    }
    p.mean_alpha = acc / quad_points;
    return p;
}

double PathlossProfile::mean_alpha_over(const AngularInterval& part) const {
    constexpr int kPoints = 8192;
    const double u_lo = std::sin(part.lo);
    const double u_hi = std::sin(part.hi);
    double acc = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        const double u = u_lo + (u_hi - u_lo) * (i + 0.5) / kPoints;
        acc += alpha(std::asin(u));
    }
    return acc / kPoints;
}

double snr_for_rate(double rate_target, const RateLink& link) {
    if (!(rate_target > 0.0)) throw std::invalid_argument("rate target must be positive");
    if (!(link.rho > 0.0 && link.rho <= 1.0)) {
        throw std::invalid_argument("resource fraction must lie in (0, 1]");
    }
    return std::exp2(rate_target / (link.rho * link.w_total)) - 1.0;
}

PathlossProfile pathloss_from_rate(const std::function<double(double)>& rate_target,
                                   const RateLink& link, AngularInterval sector,
                                   int quad_points) {
    auto alpha = [rate_target, link](double phi) {
        const double snr = snr_for_rate(rate_target(phi), link);
        return (link.p_t / link.sigma_sq) * (link.g_t_max * link.g_r_max / snr) *
               (link.w_rs / link.w_total);
    };
    return PathlossProfile::from_function(sector, std::move(alpha), quad_points);
}

SectorPartition SectorPartition::from_boundaries(const PathlossProfile& profile,
                                                 std::vector<double> interior_bounds) {
    SectorPartition part;
    std::vector<double> bounds;
    bounds.push_back(profile.sector.lo);
    for (double b : interior_bounds) bounds.push_back(b);
    bounds.push_back(profile.sector.hi);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        if (!(bounds[i + 1] > bounds[i])) {
            throw std::invalid_argument("partition boundaries must be strictly increasing");
        }
        AngularInterval piece{bounds[i], bounds[i + 1]};
        piece.validate();
        part.parts.push_back(piece);
        part.kappa.push_back(2.0 / piece.sin_measure());
        part.mean_alpha.push_back(profile.mean_alpha_over(piece));
    }
    return part;
}

SectorPartition SectorPartition::equal_angle(const PathlossProfile& profile, int m) {
    if (m < 1) throw std::invalid_argument("partition needs at least one piece");
    std::vector<double> bounds;
    for (int i = 1; i < m; ++i) {
        bounds.push_back(profile.sector.lo +
                         (profile.sector.hi - profile.sector.lo) * i / m);
    }
    return from_boundaries(profile, std::move(bounds));
}

SectorPartition SectorPartition::equal_sin(const PathlossProfile& profile, int m) {
    if (m < 1) throw std::invalid_argument("partition needs at least one piece");
    const double u_lo = std::sin(profile.sector.lo);
    const double u_hi = std::sin(profile.sector.hi);
    std::vector<double> bounds;
    for (int i = 1; i < m; ++i) {
        bounds.push_back(std::asin(u_lo + (u_hi - u_lo) * i / m));
    }
    return from_boundaries(profile, std::move(bounds));
}

std::vector<TargetGain> desired_pattern(const PathlossProfile& profile,
                                        const SectorPartition& partition) {
    if (partition.parts.empty()) throw std::invalid_argument("empty partition");
    std::vector<TargetGain> targets;
    targets.reserve(partition.parts.size());
    for (std::size_t m = 0; m < partition.parts.size(); ++m) {
        const auto piece = partition.parts[m];
        const double kappa = partition.kappa[m];
        const double mean = partition.mean_alpha[m];
        const auto alpha = profile.alpha;
        targets.push_back([piece, kappa, mean, alpha](double phi) {
            return piece.contains(phi) ? kappa * alpha(phi) / mean : 0.0;
        });
    }
    return targets;
}

std::vector<int> slot_allocation(const SectorPartition& partition,
                                 const PathlossProfile& profile, int j_total) {
    const auto m = partition.parts.size();
    if (m == 0) throw std::invalid_argument("empty partition");
    if (j_total < static_cast<int>(m)) {
        throw config_error("slot allocation infeasible: fewer slots than beams");
    }
    (void)profile;
    std::vector<double> weight(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        weight[i] = partition.parts[i].sin_measure() * partition.mean_alpha[i];
        total += weight[i];
    }

    // Largest-remainder rounding on the exact shares, with every beam keeping
    // at least one slot.
    std::vector<int> counts(m, 1);
    int remaining = j_total - static_cast<int>(m);
    std::vector<double> share(m), remainder(m);
    int assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        share[i] = remaining * weight[i] / total;
        counts[i] += static_cast<int>(std::floor(share[i]));
        remainder[i] = share[i] - std::floor(share[i]);
        assigned += static_cast<int>(std::floor(share[i]));
    }
    int leftover = remaining - assigned;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return partition.mean_alpha[a] > partition.mean_alpha[b];
    });
    for (int k = 0; k < leftover; ++k) counts[order[static_cast<std::size_t>(k) % m]] += 1;
    return counts;
}

// ---------------------------------------------------------------------------
// Pattern synthesis
// ---------------------------------------------------------------------------

namespace {

struct ObjectiveGrid {
    std::vector<std::vector<cxd>> steering; // per grid angle, length n_t
    std::vector<double> weight;
    std::vector<double> target_amp;
    std::vector<bool> in_band;
    std::vector<bool> in_transition;
};

ObjectiveGrid build_grid(const TargetGain& target, const AngularInterval& band,
                         int n_t, const SynthesisConfig& config) {
    ObjectiveGrid grid;
    const double step = config.grid_step_deg * kPi / 180.0;
    const int n = static_cast<int>(std::floor(kPi / step)) + 1;
    const UlaConfig tx{n_t};
    const double trans = config.transition_sin >= 0.0 ? config.transition_sin : 2.0 / n_t;
    const double u_lo = std::sin(band.lo);
    const double u_hi = std::sin(band.hi);
    grid.steering.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double phi = std::min(kHalfPi, -kHalfPi + i * step);
        grid.steering.push_back(steering_vector(tx, phi));
        const double u = std::sin(phi);
        const bool in = band.contains(phi);
        const bool transition = !in && u > u_lo - trans && u < u_hi + trans;
        grid.in_band.push_back(in);
        grid.in_transition.push_back(transition);
        grid.weight.push_back(in ? config.in_band_weight
                                 : (transition ? 0.0 : config.out_of_band_weight));
        grid.target_amp.push_back(std::sqrt(std::max(0.0, target(phi))));
    }
    return grid;
}

// Fourier projection of the target amplitude onto the array manifold: the
// unconstrained complex least-squares design with a linear-phase (center-tap
// delay) reference, used to seed the search.
std::vector<cxd> ls_projection_seed(const TargetGain& target, int n_t) {
    constexpr int kNodes = 4096;
    const double center = (n_t - 1) / 2.0;
    std::vector<cxd> w(static_cast<std::size_t>(n_t), cxd{0.0, 0.0});
    for (int g = 0; g < kNodes; ++g) {
        const double u = -1.0 + 2.0 * (g + 0.5) / kNodes;
        const double amp = std::sqrt(std::max(0.0, target(std::asin(u))));
        if (amp == 0.0) continue;
        const double start = kPi * center * u;
        cxd cur{amp * std::cos(start), amp * std::sin(start)};
        const double phase = -kPi * u;
        const cxd step{std::cos(phase), std::sin(phase)};
        for (int k = 0; k < n_t; ++k) {
            w[static_cast<std::size_t>(k)] += cur;
            cur *= step;
        }
    }
    double nsq = 0.0;
    for (const auto& c : w) nsq += std::norm(c);
    if (nsq > 0.0) {
        for (auto& c : w) c /= std::sqrt(nsq);
    }
    return w;
}

double evaluate_mismatch(const ObjectiveGrid& grid, const std::vector<cxd>& w,
                         double undershoot_weight = 1.0) {
    double acc = 0.0;
    for (std::size_t g = 0; g < grid.steering.size(); ++g) {
        const double amp = std::abs(
            kernels::cdot(grid.steering[g].data(), w.data(), w.size()));
        const double d = amp - grid.target_amp[g];
        double wt = grid.weight[g];
        if (grid.in_band[g] && d < 0.0) wt *= undershoot_weight;
        acc += wt * d * d;
    }
    return acc;
}

struct Decoder {
    int n_t;
    bool variable_modulus;

    int dim() const { return variable_modulus ? n_t + (n_t + 1) / 2 : n_t; }

    std::vector<cxd> decode(const std::vector<double>& genes) const {
        std::vector<cxd> w(static_cast<std::size_t>(n_t));
        std::vector<double> mag(static_cast<std::size_t>(n_t),
                                1.0 / std::sqrt(static_cast<double>(n_t)));
        if (variable_modulus) {
            const int half = (n_t + 1) / 2;
            double nsq = 0.0;
            for (int i = 0; i < half; ++i) {
                const double v = std::fabs(genes[static_cast<std::size_t>(n_t + i)]) + 1e-6;
                mag[static_cast<std::size_t>(i)] = v;
                mag[static_cast<std::size_t>(n_t - 1 - i)] = v;
            }
            for (int i = 0; i < n_t; ++i) nsq += mag[static_cast<std::size_t>(i)] *
                                                 mag[static_cast<std::size_t>(i)];
            const double inv = 1.0 / std::sqrt(nsq);
            for (auto& v : mag) v *= inv;
        }
        for (int i = 0; i < n_t; ++i) {
            const double th = genes[static_cast<std::size_t>(i)];
            w[static_cast<std::size_t>(i)] =
                cxd{mag[static_cast<std::size_t>(i)] * std::cos(th),
                    mag[static_cast<std::size_t>(i)] * std::sin(th)};
        }
        return w;
    }
};

// Steered and quadratically chirped phase profiles; the chirp widens the
// mainlobe, which is the natural starting point for flat sector targets.
std::vector<double> chirp_genes(const Decoder& dec, double center_angle, double chirp) {
    std::vector<double> genes(static_cast<std::size_t>(dec.dim()), 0.0);
    const double su = std::sin(center_angle);
    const double mid = (dec.n_t - 1) / 2.0;
    for (int n = 0; n < dec.n_t; ++n) {
        genes[static_cast<std::size_t>(n)] =
            -kPi * n * su + chirp * (n - mid) * (n - mid) / dec.n_t;
    }
    if (dec.variable_modulus) {
        for (int i = dec.n_t; i < dec.dim(); ++i) {
            genes[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(dec.n_t));
        }
    }
    return genes;
}

// Alternating projections between the array manifold and the target
// amplitude mask (Gerchberg-Saxton). Operates on an exactly invertible
// uniform sin-space grid; the constant-modulus or mirror-symmetric magnitude
// constraint is re-imposed every round trip.
std::vector<cxd> gs_seed(const TargetGain& target, const AngularInterval& band,
                         int n_t, bool variable_modulus, double transition_sin,
                         std::vector<cxd> initial, int iterations = 150) {
    const int grid_n = 8 * n_t;
    std::vector<double> u(static_cast<std::size_t>(grid_n));
    std::vector<double> t_amp(static_cast<std::size_t>(grid_n));
    std::vector<int> zone(static_cast<std::size_t>(grid_n)); // 0 out, 1 band, 2 transition
    const double u_lo = std::sin(band.lo);
    const double u_hi = std::sin(band.hi);
    for (int g = 0; g < grid_n; ++g) {
        u[static_cast<std::size_t>(g)] = -1.0 + 2.0 * (g + 0.5) / grid_n;
        const double ug = u[static_cast<std::size_t>(g)];
        const double phi = std::asin(ug);
        t_amp[static_cast<std::size_t>(g)] = std::sqrt(std::max(0.0, target(phi)));
        if (band.contains(phi)) {
            zone[static_cast<std::size_t>(g)] = 1;
        } else if (ug > u_lo - transition_sin && ug < u_hi + transition_sin) {
            zone[static_cast<std::size_t>(g)] = 2;
        }
    }

    auto w = std::move(initial);

    std::vector<cxd> pattern(static_cast<std::size_t>(grid_n));
    const double cm_mag = 1.0 / std::sqrt(static_cast<double>(n_t));
    for (int it = 0; it < iterations; ++it) {
        // impose the modulus structure on the weights
        if (variable_modulus) {
            for (int i = 0; i < (n_t + 1) / 2; ++i) {
                const auto a = static_cast<std::size_t>(i);
                const auto b = static_cast<std::size_t>(n_t - 1 - i);
                const double mag = 0.5 * (std::abs(w[a]) + std::abs(w[b])) + 1e-12;
                w[a] *= mag / (std::abs(w[a]) + 1e-300);
                w[b] *= mag / (std::abs(w[b]) + 1e-300);
            }
            double nsq = 0.0;
            for (const auto& c : w) nsq += std::norm(c);
            for (auto& c : w) c /= std::sqrt(nsq);
        } else {
            for (auto& c : w) {
                const double mag = std::abs(c);
                c = mag > 0.0 ? c * (cm_mag / mag) : cxd{cm_mag, 0.0};
            }
        }

        // forward transform and amplitude masking
        for (int g = 0; g < grid_n; ++g) {
            const double ug = u[static_cast<std::size_t>(g)];
            const cxd step{std::cos(kPi * ug), std::sin(kPi * ug)};
            cxd cur{1.0, 0.0};
            cxd acc{0.0, 0.0};
            for (int k = 0; k < n_t; ++k) {
                acc += w[static_cast<std::size_t>(k)] * cur;
                cur *= step;
            }
            const auto zg = zone[static_cast<std::size_t>(g)];
            if (zg == 1) {
                const double mag = std::abs(acc);
                pattern[static_cast<std::size_t>(g)] =
                    mag > 0.0 ? acc * (t_amp[static_cast<std::size_t>(g)] / mag)
                              : cxd{t_amp[static_cast<std::size_t>(g)], 0.0};
            } else if (zg == 2) {
                pattern[static_cast<std::size_t>(g)] = acc; // don't care
            } else {
                pattern[static_cast<std::size_t>(g)] = cxd{0.0, 0.0};
            }
        }

        // adjoint back to the coefficients (orthogonal on this grid)
        for (auto& c : w) c = cxd{0.0, 0.0};
        for (int g = 0; g < grid_n; ++g) {
            const cxd b = pattern[static_cast<std::size_t>(g)];
            if (b == cxd{0.0, 0.0}) continue;
            const double ug = u[static_cast<std::size_t>(g)];
            cxd cur = b;
            const cxd step{std::cos(-kPi * ug), std::sin(-kPi * ug)};
            for (int k = 0; k < n_t; ++k) {
                w[static_cast<std::size_t>(k)] += cur;
                cur *= step;
            }
        }
    }

    // final modulus projection and normalization
    if (variable_modulus) {
        for (int i = 0; i < (n_t + 1) / 2; ++i) {
            const auto a = static_cast<std::size_t>(i);
            const auto b = static_cast<std::size_t>(n_t - 1 - i);
            const double mag = 0.5 * (std::abs(w[a]) + std::abs(w[b])) + 1e-12;
            w[a] *= mag / (std::abs(w[a]) + 1e-300);
            w[b] *= mag / (std::abs(w[b]) + 1e-300);
        }
    } else {
        for (auto& c : w) {
            const double mag = std::abs(c);
            c = mag > 0.0 ? c * (cm_mag / mag) : cxd{cm_mag, 0.0};
        }
    }
    double nsq = 0.0;
    for (const auto& c : w) nsq += std::norm(c);
    for (auto& c : w) c /= std::sqrt(nsq);
    return w;
}

// Genes from explicit weights: phases, plus mirror-averaged magnitudes for
// the variable-modulus decoder.
std::vector<double> encode_genes(const Decoder& dec, const std::vector<cxd>& w) {
    std::vector<double> genes(static_cast<std::size_t>(dec.dim()), 0.0);
    for (int n = 0; n < dec.n_t; ++n) {
        genes[static_cast<std::size_t>(n)] = std::arg(w[static_cast<std::size_t>(n)]);
    }
    if (dec.variable_modulus) {
        const int half = (dec.n_t + 1) / 2;
        for (int i = 0; i < half; ++i) {
            genes[static_cast<std::size_t>(dec.n_t + i)] =
                0.5 * (std::abs(w[static_cast<std::size_t>(i)]) +
                       std::abs(w[static_cast<std::size_t>(dec.n_t - 1 - i)]));
        }
    }
    return genes;
}

struct GaResult {
    std::vector<double> genes;
    double score;
    bool stagnated;
};

GaResult run_ga(const ObjectiveGrid& grid, const Decoder& dec,
                const SynthesisConfig& config,
                const std::vector<std::vector<double>>& extra_seeds) {
    RngStream rng(config.seed, 0xbea3u);
    const int dim = dec.dim();
    const int pop_size = std::max(8, config.population);
    const double mag0 = 1.0 / std::sqrt(static_cast<double>(dec.n_t));

    const auto score_of = [&](const std::vector<double>& genes) {
        return evaluate_mismatch(grid, dec.decode(genes), config.undershoot_weight);
    };

    std::vector<std::vector<double>> pop;
    pop.reserve(static_cast<std::size_t>(pop_size));
    const double band_center = [&] {
        // densest in-band region of the target on the grid
        double best = 0.0, best_t = -1.0;
        const double step = config.grid_step_deg * kPi / 180.0;
        for (std::size_t g = 0; g < grid.target_amp.size(); ++g) {
            if (grid.in_band[g] && grid.target_amp[g] > best_t) {
                best_t = grid.target_amp[g];
                best = -kHalfPi + static_cast<double>(g) * step;
            }
        }
        return best;
    }();

    static constexpr double kChirps[] = {0.0,  0.5,  -0.5, 1.0, -1.0, 2.0,
                                         -2.0, 4.0,  -4.0, 8.0, -8.0, 16.0};
    for (const auto& seed_genes : extra_seeds) pop.push_back(seed_genes);
    for (double c : kChirps) pop.push_back(chirp_genes(dec, band_center, c));
    while (static_cast<int>(pop.size()) < pop_size) {
        std::vector<double> genes(static_cast<std::size_t>(dim));
        for (int i = 0; i < dec.n_t; ++i) {
            genes[static_cast<std::size_t>(i)] = rng.uniform(-kPi, kPi);
        }
        for (int i = dec.n_t; i < dim; ++i) {
            genes[static_cast<std::size_t>(i)] = mag0 * rng.uniform(0.2, 2.0);
        }
        pop.push_back(std::move(genes));
    }

    std::vector<double> scores(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) scores[i] = score_of(pop[i]);

    auto best_idx = static_cast<std::size_t>(
        std::min_element(scores.begin(), scores.end()) - scores.begin());
    std::vector<double> best = pop[best_idx];
    double best_score = scores[best_idx];

    const auto tournament = [&]() -> std::size_t {
        std::size_t pick = rng.uniform_int(pop.size());
        for (int k = 0; k < 2; ++k) {
            const std::size_t cand = rng.uniform_int(pop.size());
            if (scores[cand] < scores[pick]) pick = cand;
        }
        return pick;
    };

    int stall = 0;
    double sigma_scale = 1.0;
    for (int gen = 0; gen < config.generations; ++gen) {
        std::vector<std::vector<double>> next;
        std::vector<double> next_scores;
        next.reserve(pop.size());
        next_scores.reserve(pop.size());

        // elitism
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0u);
        std::partial_sort(order.begin(), order.begin() + 4, order.end(),
                          [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        for (int e = 0; e < 4; ++e) {
            next.push_back(pop[order[static_cast<std::size_t>(e)]]);
            next_scores.push_back(scores[order[static_cast<std::size_t>(e)]]);
        }

        while (next.size() < pop.size()) {
            const auto& pa = pop[tournament()];
            const auto& pb = pop[tournament()];
            std::vector<double> child(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                const double blend = rng.uniform(-0.25, 1.25);
                child[static_cast<std::size_t>(i)] =
                    pa[static_cast<std::size_t>(i)] +
                    blend * (pb[static_cast<std::size_t>(i)] - pa[static_cast<std::size_t>(i)]);
            }
            const double mut_prob = 3.0 / dim;
            for (int i = 0; i < dim; ++i) {
                if (rng.uniform() < mut_prob) {
                    const double sigma = (i < dec.n_t ? 0.5 : 0.12 * mag0) * sigma_scale;
                    child[static_cast<std::size_t>(i)] += sigma * rng.normal();
                }
            }
            next_scores.push_back(score_of(child));
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        scores = std::move(next_scores);

        best_idx = static_cast<std::size_t>(
            std::min_element(scores.begin(), scores.end()) - scores.begin());
        if (scores[best_idx] < best_score - 1e-12) {
            best_score = scores[best_idx];
            best = pop[best_idx];
            stall = 0;
            sigma_scale = std::max(0.2, sigma_scale * 0.995);
        } else if (++stall >= config.stall_limit) {
            // shake-up: rebuild the worse half around the incumbent
            std::vector<std::size_t> ord(pop.size());
            std::iota(ord.begin(), ord.end(), 0u);
            std::sort(ord.begin(), ord.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
            for (std::size_t k = pop.size() / 2; k < pop.size(); ++k) {
                auto& genes = pop[ord[k]];
                genes = best;
                for (int i = 0; i < dim; ++i) {
                    const double sigma = (i < dec.n_t ? 1.0 : 0.3 * mag0);
                    genes[static_cast<std::size_t>(i)] += sigma * rng.normal();
                }
                scores[ord[k]] = score_of(genes);
            }
            sigma_scale = 1.0;
            stall = 0;
        }
    }

    // Greedy per-gene pattern search around the GA incumbent.
    double delta = 0.2;
    int evals = 0;
    const int eval_cap = 40 * dim;
    while (delta > 1e-4 && evals < eval_cap) {
        bool improved = false;
        for (int i = 0; i < dim && evals < eval_cap; ++i) {
            for (const double sign : {+1.0, -1.0}) {
                auto trial = best;
                const double scale = (i < dec.n_t) ? 1.0 : mag0;
                trial[static_cast<std::size_t>(i)] += sign * delta * scale;
                const double s = score_of(trial);
                ++evals;
                if (s < best_score - 1e-14) {
                    best_score = s;
                    best = std::move(trial);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) delta *= 0.5;
    }

    return GaResult{std::move(best), best_score, stall >= config.stall_limit};
}

SynthesisReport make_report(const ObjectiveGrid& grid, const std::vector<cxd>& w,
                            BeamKind kind, bool stagnated) {
    SynthesisReport rep;
    rep.mismatch = evaluate_mismatch(grid, w); // plain weighted L2
    rep.kind = kind;
    rep.stagnated = stagnated;
    double min_in = std::numeric_limits<double>::infinity();
    double max_out = 0.0;
    for (std::size_t g = 0; g < grid.steering.size(); ++g) {
        const double gain = std::norm(
            kernels::cdot(grid.steering[g].data(), w.data(), w.size()));
        if (grid.in_band[g] && grid.target_amp[g] > 0.0) {
            min_in = std::min(min_in, gain);
        } else if (!grid.in_band[g] && !grid.in_transition[g]) {
            max_out = std::max(max_out, gain);
        }
    }
    rep.min_in_band_gain = std::isfinite(min_in) ? min_in : 0.0;
    rep.max_leakage = max_out;
    return rep;
}

std::pair<Beamformer, SynthesisReport> synthesize(const TargetGain& target,
                                                  AngularInterval band, int n_t,
                                                  const SynthesisConfig& config,
                                                  bool variable_modulus) {
    band.validate();
    if (n_t < 2) throw std::invalid_argument("synthesis needs n_t >= 2");
    if (!(config.grid_step_deg > 0.0 && config.grid_step_deg <= 0.5)) {
        throw std::invalid_argument("synthesis grid must be at most 0.5 degrees");
    }
    const auto grid = build_grid(target, band, n_t, config);
    const Decoder dec{n_t, variable_modulus};
    const double trans = config.transition_sin >= 0.0 ? config.transition_sin : 2.0 / n_t;

    // Seed pool: the least-squares projection, plus alternating-projection
    // refinements started from the projection and from chirped phase profiles
    // whose spread matches the band width.
    std::vector<std::vector<double>> seeds;
    const auto ls = ls_projection_seed(target, n_t);
    seeds.push_back(encode_genes(dec, ls));
    const auto add_gs = [&](std::vector<cxd> start) {
        seeds.push_back(encode_genes(
            dec, gs_seed(target, band, n_t, variable_modulus, trans, std::move(start))));
    };
    add_gs(ls);
    const double band_width = std::sin(band.hi) - std::sin(band.lo);
    const double band_mid = std::asin(0.5 * (std::sin(band.hi) + std::sin(band.lo)));
    const double c0 = 0.5 * kPi * band_width;
    for (const double scale : {0.6, 1.0, 1.5}) {
        for (const double sign : {+1.0, -1.0}) {
            add_gs(dec.decode(chirp_genes(dec, band_mid, sign * scale * c0)));
        }
    }
    auto ga = run_ga(grid, dec, config, seeds);
    auto w = dec.decode(ga.genes);
    // exact unit norm (decode normalizes VM; CM needs the 1/sqrt(n_t) scale)
    const double nsq = kernels::sum_abs2(w.data(), w.size());
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& c : w) c *= inv;
    auto report = make_report(grid, w, variable_modulus ? BeamKind::vm : BeamKind::cm,
                              ga.stagnated);
    return {Beamformer{std::move(w)}, report};
}

} // namespace

std::pair<Beamformer, SynthesisReport> synthesize_cm(const TargetGain& target,
                                                     AngularInterval band, int n_t,
                                                     const SynthesisConfig& config) {
    return synthesize(target, band, n_t, config, false);
}

std::pair<Beamformer, SynthesisReport> synthesize_vm(const TargetGain& target,
                                                     AngularInterval band, int n_t,
                                                     const SynthesisConfig& config) {
    return synthesize(target, band, n_t, config, true);
}

int Codebook::period() const {
    return std::accumulate(slots.begin(), slots.end(), 0);
}

void Codebook::validate() const {
    if (beams.empty() || beams.size() != slots.size()) {
        throw std::invalid_argument("codebook needs one slot count per beam");
    }
    for (int s : slots) {
        if (s < 1) throw std::invalid_argument("every beam needs at least one slot");
    }
}

Codebook random_codebook(RngStream& rng, int n_t, int j_total) {
    if (n_t < 1 || j_total < 1) throw std::invalid_argument("bad random codebook shape");
    Codebook cb;
    cb.beams.reserve(static_cast<std::size_t>(j_total));
    cb.slots.assign(static_cast<std::size_t>(j_total), 1);
    for (int j = 0; j < j_total; ++j) {
        std::vector<cxd> w(static_cast<std::size_t>(n_t));
        for (auto& c : w) c = rng.complex_normal(1.0);
        const double inv = 1.0 / std::sqrt(kernels::sum_abs2(w.data(), w.size()));
        for (auto& c : w) c *= inv;
        cb.beams.push_back(Beamformer{std::move(w)});
    }
    return cb;
}

Codebook omni_codebook(int n_t, int j_total) {
    if (n_t < 1 || j_total < 1) throw std::invalid_argument("bad omni codebook shape");
    std::vector<cxd> w(static_cast<std::size_t>(n_t), cxd{0.0, 0.0});
    w[0] = cxd{1.0, 0.0};
    Codebook cb;
    cb.beams.push_back(Beamformer{std::move(w)});
    cb.slots.assign(1, j_total);
    return cb;
}

std::pair<Beamformer, double> apply_power_constraint(const Beamformer& w, double beta,
                                                     int n_t) {
    if (static_cast<int>(w.w.size()) != n_t) {
        throw std::invalid_argument("beamformer length mismatch");
    }
    if (!(beta >= 1.0 / n_t - 1e-12 && beta <= 1.0 + 1e-12)) {
        throw config_error("per-antenna power fraction must lie in [1/n_t, 1]");
    }
    double max_sq = 0.0;
    for (const auto& c : w.w) max_sq = std::max(max_sq, std::norm(c));
    if (max_sq <= beta + 1e-15) {
        return {w, kernels::sum_abs2(w.w.data(), w.w.size())};
    }
    const double scale = std::sqrt(beta / max_sq);
    Beamformer scaled = w;
    for (auto& c : scaled.w) c *= scale;
    const double fraction = kernels::sum_abs2(scaled.w.data(), scaled.w.size());
    return {std::move(scaled), fraction};
}

double avg_codebook_gain(const Codebook& codebook, double angle, const UlaConfig& tx) {
    codebook.validate();
    const auto v = steering_vector(tx, angle);
    double acc = 0.0;
    int total = 0;
    for (std::size_t m = 0; m < codebook.beams.size(); ++m) {
        const auto& w = codebook.beams[m].w;
        if (static_cast<int>(w.size()) != tx.n_elements) {
            throw std::invalid_argument("codebook beam length mismatch");
        }
        acc += codebook.slots[m] * std::norm(kernels::cdot(v.data(), w.data(), w.size()));
        total += codebook.slots[m];
    }
    return acc / total;
}

std::string target_profile_hash(const PathlossProfile& profile) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const char* buf, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    };
    char buf[64];
    const auto mix_double = [&](double v) {
        const int n = std::snprintf(buf, sizeof buf, "%.17g;", v);
        mix(buf, static_cast<std::size_t>(n));
    };
    mix_double(profile.sector.lo);
    mix_double(profile.sector.hi);
    constexpr int kSamples = 1024;
    for (int i = 0; i < kSamples; ++i) {
        const double phi = profile.sector.lo +
                           (profile.sector.hi - profile.sector.lo) * (i + 0.5) / kSamples;
        mix_double(profile.alpha(phi));
    }
    const int n = std::snprintf(buf, sizeof buf, "%016llx",
                                static_cast<unsigned long long>(h));
    return std::string(buf, static_cast<std::size_t>(n));
}

void save_codebook(const Codebook& codebook, const CodebookMeta& meta,
                   const std::filesystem::path& path) {
    codebook.validate();
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_t"] = codebook.beams.front().w.size();
    j["method"] = meta.method;
    j["m"] = meta.m;
    j["target_profile_hash"] = meta.target_profile_hash;
    j["slots"] = codebook.slots;
    auto beams = nlohmann::json::array();
    for (const auto& beam : codebook.beams) {
        auto weights = nlohmann::json::array();
        for (const auto& c : beam.w) {
            weights.push_back(nlohmann::json::array({c.real(), c.imag()}));
        }
        beams.push_back(std::move(weights));
    }
    j["beams"] = std::move(beams);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write codebook file: " + path.string());
    out << j.dump(2) << '\n';
}

std::pair<Codebook, CodebookMeta> load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open codebook file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed codebook JSON: ") + e.what());
    }
    try {
        Codebook cb;
        CodebookMeta meta;
        meta.method = j.at("method").get<std::string>();
        meta.m = j.at("m").get<int>();
        meta.target_profile_hash = j.value("target_profile_hash", "");
        cb.slots = j.at("slots").get<std::vector<int>>();
        const auto n_t = j.at("n_t").get<std::size_t>();
        for (const auto& beam : j.at("beams")) {
            Beamformer b;
            b.w.reserve(n_t);
            for (const auto& c : beam) {
                b.w.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
            }
            if (b.w.size() != n_t) throw config_error("codebook beam length mismatch");
            cb.beams.push_back(std::move(b));
        }
        cb.validate();
        return {std::move(cb), std::move(meta)};
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("codebook JSON missing fields: ") + e.what());
    }
}

} // namespace mmwave::beam
