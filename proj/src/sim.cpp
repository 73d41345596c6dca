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

#include "mmwave/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "mmwave/errors.hpp"
#include "mmwave/kernels.hpp"
#include "mmwave/ldp.hpp"

namespace mmwave::sim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void parallel_trials(long trials, int workers, const std::function<void(long)>& body) {
    const int n_workers = std::max(1, workers);
    if (n_workers == 1 || trials < 64) {
        for (long i = 0; i < trials; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            for (long i = w; i < trials; i += n_workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct Ci {
    double lo;
    double hi;
};

Ci wilson_ci(double successes, long n) {
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double phat = successes / nn;
    const double denom = 1.0 + z * z / nn;
    const double center = (phat + z * z / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Ci mean_ci(double mean, double sd, long n) {
    constexpr double z = 1.959963984540054;
    const double half = z * sd / std::sqrt(static_cast<double>(n));
    return {std::max(0.0, mean - half), std::min(1.0, mean + half)};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double Scenario::sector_lo() const { return -sector_half_deg * kDegToRad; }
double Scenario::sector_hi() const { return sector_half_deg * kDegToRad; }

void Scenario::validate() const {
    if (id.empty() || id.find(',') != std::string::npos) {
        throw config_error("scenario id must be nonempty and comma-free");
    }
    if (!(sector_half_deg > 0.0 && sector_half_deg <= 90.0)) {
        throw config_error("sector half-width must lie in (0, 90] degrees");
    }
    try {
        frame.validate();
        UlaConfig{n_t}.validate();
        UlaConfig{n_r}.validate();
    } catch (const std::exception& e) {
        throw config_error(e.what());
    }
    if (l_list.empty()) throw config_error("l_list must be nonempty");
    for (int l : l_list) {
        if (l < 1) throw config_error("every L must be >= 1");
    }
    if (snr_rs_db.empty()) throw config_error("snr_rs_db must be nonempty");
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw config_error("p_fa must lie in (0, 1)");
    if (q_paths < 1) throw config_error("q_paths must be >= 1");
    if (trials < 1) throw config_error("trials must be >= 1");
    if (j_total < 1) throw config_error("j_total must be >= 1");
    if (m < 1) throw config_error("codebook size m must be >= 1");
    if (method == CodebookMethod::file && codebook_path.empty()) {
        throw config_error("codebook method 'file' needs a path");
    }
    if (!(beta >= 1.0 / n_t - 1e-12 && beta <= 1.0 + 1e-12)) {
        throw config_error("beta must lie in [1/n_t, 1]");
    }
    if (protocol == Protocol::full_sweep && estimator != Estimator::empirical) {
        throw config_error("the full-sweep protocol requires the empirical estimator");
    }
    if (bound_mode == BoundMode::empirical && bound_trials < 100) {
        throw config_error("empirical bound needs bound_trials >= 100");
    }
}

namespace {

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    throw config_error(std::string("unknown ") + what + ": " + s);
}

} // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        s.id = j.value("id", s.id);
        if (j.contains("topology")) {
            s.topology = parse_enum<Topology>(j["topology"].get<std::string>(),
                                              {{"open-sector", Topology::open_sector},
                                               {"half-blocked", Topology::half_blocked}},
                                              "topology");
        }
        s.sector_half_deg = j.value("sector_half_deg", s.sector_half_deg);
        if (j.contains("frame")) {
            const auto& f = j["frame"];
            s.frame.t_slot = f.value("t_slot", s.frame.t_slot);
            s.frame.t_rs = f.value("t_rs", s.frame.t_rs);
            s.frame.sample_rate = f.value("sample_rate", s.frame.sample_rate);
        }
        if (j.contains("arrays")) {
            s.n_t = j["arrays"].value("n_t", s.n_t);
            s.n_r = j["arrays"].value("n_r", s.n_r);
        }
        if (j.contains("codebook")) {
            const auto& c = j["codebook"];
            if (c.contains("method")) {
                s.method = parse_enum<CodebookMethod>(c["method"].get<std::string>(),
                                                      {{"omni", CodebookMethod::omni},
                                                       {"random", CodebookMethod::random},
                                                       {"cm", CodebookMethod::cm},
                                                       {"vm", CodebookMethod::vm},
                                                       {"file", CodebookMethod::file}},
                                                      "codebook method");
            }
            s.m = c.value("m", s.m);
            s.beta = c.value("beta", s.beta);
            s.j_total = c.value("j_total", s.j_total);
            s.codebook_path = c.value("path", s.codebook_path);
            s.design_seed = c.value("design_seed", s.design_seed);
            if (c.contains("slot_policy")) {
                s.slot_policy = parse_enum<SlotPolicy>(c["slot_policy"].get<std::string>(),
                                                       {{"optimized", SlotPolicy::optimized},
                                                        {"equal", SlotPolicy::equal}},
                                                       "slot policy");
            }
            if (c.contains("generations")) s.synthesis.generations = c["generations"].get<int>();
            if (c.contains("population")) s.synthesis.population = c["population"].get<int>();
        }
        if (j.contains("detector")) {
            s.p_fa = j["detector"].value("p_fa", s.p_fa);
            if (j["detector"].contains("l_list")) {
                s.l_list = j["detector"]["l_list"].get<std::vector<int>>();
            }
        }
        if (j.contains("channel")) {
            const auto& c = j["channel"];
            s.q_paths = c.value("q_paths", s.q_paths);
            s.dominant_ratio_db = c.value("dominant_ratio_db", s.dominant_ratio_db);
            if (c.contains("snr_rs_db")) {
                s.snr_rs_db = c["snr_rs_db"].get<std::vector<double>>();
            }
            s.p_t = c.value("p_t", s.p_t);
            s.sigma_sq = c.value("sigma_sq", s.sigma_sq);
            if (c.contains("rs_kind")) {
                s.rs_kind = parse_enum<RsKind>(c["rs_kind"].get<std::string>(),
                                               {{"qpsk", RsKind::qpsk},
                                                {"zadoff-chu", RsKind::zadoff_chu}},
                                               "rs kind");
            }
        }
        s.trials = j.value("trials", s.trials);
        s.master_seed = j.value("master_seed", s.master_seed);
        if (j.contains("estimator")) {
            s.estimator = parse_enum<Estimator>(j["estimator"].get<std::string>(),
                                                {{"conditional", Estimator::conditional},
                                                 {"empirical", Estimator::empirical}},
                                                "estimator");
        }
        if (j.contains("protocol")) {
            s.protocol = parse_enum<Protocol>(j["protocol"].get<std::string>(),
                                              {{"true-lag", Protocol::true_lag},
                                               {"full-sweep", Protocol::full_sweep}},
                                              "protocol");
        }
        if (j.contains("bound")) {
            const auto& b = j["bound"];
            if (b.contains("mode")) {
                s.bound_mode = parse_enum<BoundMode>(
                    b["mode"].get<std::string>(),
                    {{"deterministic-dominant", BoundMode::deterministic_dominant},
                     {"empirical", BoundMode::empirical},
                     {"none", BoundMode::none}},
                    "bound mode");
            }
            s.bound_trials = b.value("trials", s.bound_trials);
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("scenario JSON: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario scenario_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scenario file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed scenario JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

double alpha_ref_for_snr(const Scenario& scenario, double snr_rs_db) {
    const double snr = std::pow(10.0, snr_rs_db / 10.0);
    return scenario.p_t / (scenario.sigma_sq * snr);
}

beam::PathlossProfile scenario_pathloss(const Scenario& scenario, double alpha_ref) {
    const beam::AngularInterval sector{scenario.sector_lo(), scenario.sector_hi()};
    switch (scenario.topology) {
        case Topology::open_sector:
            return beam::PathlossProfile::constant(sector, alpha_ref);
        case Topology::half_blocked:
            return beam::PathlossProfile::piecewise(sector, {0.0},
                                                    {alpha_ref / 2.0, alpha_ref});
    }
    throw config_error("unhandled topology");
}

PreparedCodebook prepare_codebook(const Scenario& scenario) {
    scenario.validate();
    PreparedCodebook out;
    switch (scenario.method) {
        case CodebookMethod::omni:
            out.codebook = beam::omni_codebook(scenario.n_t, scenario.j_total);
            out.method_label = "omni";
            break;
        case CodebookMethod::random: {
            RngStream rng(scenario.design_seed, 0xc0deu);
            out.codebook = beam::random_codebook(rng, scenario.n_t, scenario.j_total);
            out.method_label = "random";
            break;
        }
        case CodebookMethod::file: {
            auto [cb, meta] = beam::load_codebook(scenario.codebook_path);
            if (static_cast<int>(cb.beams.front().w.size()) != scenario.n_t) {
                throw config_error("codebook file does not match the transmit array size");
            }
            out.codebook = std::move(cb);
            out.method_label = meta.method;
            break;
        }
        case CodebookMethod::cm:
        case CodebookMethod::vm: {
            // Only pathloss ratios enter the design; the reference level cancels.
            const auto profile = scenario_pathloss(scenario, 1.0);
            const auto partition = beam::SectorPartition::equal_sin(profile, scenario.m);
            const auto targets = beam::desired_pattern(profile, partition);
            beam::Codebook cb;
            for (int i = 0; i < scenario.m; ++i) {
                auto cfg = scenario.synthesis;
                cfg.seed = scenario.design_seed + static_cast<std::uint64_t>(i);
                auto [beamformer, report] =
                    scenario.method == CodebookMethod::cm
                        ? beam::synthesize_cm(targets[static_cast<std::size_t>(i)],
                                              partition.parts[static_cast<std::size_t>(i)],
                                              scenario.n_t, cfg)
                        : beam::synthesize_vm(targets[static_cast<std::size_t>(i)],
                                              partition.parts[static_cast<std::size_t>(i)],
                                              scenario.n_t, cfg);
                (void)report;
                cb.beams.push_back(std::move(beamformer));
            }
            cb.slots = scenario.slot_policy == SlotPolicy::optimized
                           ? beam::slot_allocation(partition, profile, scenario.j_total)
                           : [&] {
                                 std::vector<int> eq(static_cast<std::size_t>(scenario.m),
                                                     scenario.j_total / scenario.m);
                                 for (int k = 0; k < scenario.j_total % scenario.m; ++k) {
                                     eq[static_cast<std::size_t>(k)] += 1;
                                 }
                                 return eq;
                             }();
            out.codebook = std::move(cb);
            out.method_label = scenario.method == CodebookMethod::cm ? "cm" : "vm";
            break;
        }
    }
    out.codebook.validate();

    // Per-antenna power constraint, then unroll into the slot sequence.
    std::vector<Beamformer> scaled;
    scaled.reserve(out.codebook.beams.size());
    for (const auto& b : out.codebook.beams) {
        scaled.push_back(beam::apply_power_constraint(b, scenario.beta, scenario.n_t).first);
    }
    for (std::size_t mth = 0; mth < scaled.size(); ++mth) {
        for (int k = 0; k < out.codebook.slots[mth]; ++k) {
            out.slot_sequence.push_back(scaled[mth]);
        }
    }
    return out;
}

namespace {

struct TrialContext {
    const Scenario* scenario;
    const PreparedCodebook* codebook;
    const RsSequence* rs;
    beam::PathlossProfile profile;
    UlaConfig rx, tx;
    int l;
    double gamma;
    ncf::DetectorDims dims;
};

double draw_lambda(RngStream& rng, const TrialContext& ctx,
                   std::vector<MultipathChannel>* window_out,
                   std::vector<Beamformer>* beams_out) {
    const auto& sc = *ctx.scenario;
    const double phi = rng.uniform(sc.sector_lo(), sc.sector_hi());
    ChannelConfig cfg;
    cfg.q_paths = sc.q_paths;
    cfg.dominant_aod = phi;
    cfg.dominant_ratio_db = sc.dominant_ratio_db;
    cfg.pathloss = ctx.profile.alpha(phi);
    cfg.scatter_aod_lo = sc.sector_lo();
    cfg.scatter_aod_hi = sc.sector_hi();
    auto window = sample_channel_window(rng, cfg, ctx.l);

    const auto& seq = ctx.codebook->slot_sequence;
    const auto j_total = seq.size();
    const auto phase = rng.uniform_int(j_total);

    double sum_h2 = 0.0;
    std::vector<Beamformer> beams;
    if (beams_out) beams.reserve(window.size());
    for (std::size_t li = 0; li < window.size(); ++li) {
        const auto& w = seq[(phase + li) % j_total];
        if (beams_out) beams.push_back(w);
        const auto h = effective_channel(window[li], w.w, ctx.rx, ctx.tx);
        sum_h2 += kernels::sum_abs2(h.data(), h.size());
    }
    if (window_out) *window_out = std::move(window);
    if (beams_out) *beams_out = std::move(beams);
    return 2.0 * ctx.rs->energy() * sum_h2 / sc.sigma_sq;
}

double conditional_trial(RngStream& rng, const TrialContext& ctx) {
    const double lambda = draw_lambda(rng, ctx, nullptr, nullptr);
    return ncf::miss_prob(ctx.gamma, ctx.dims, lambda);
}

bool empirical_trial(RngStream& rng, const TrialContext& ctx) {
    std::vector<MultipathChannel> window;
    std::vector<Beamformer> beams;
    (void)draw_lambda(rng, ctx, &window, &beams);
    const auto& sc = *ctx.scenario;
    if (sc.protocol == Protocol::true_lag) {
        const auto obs = synthesize_observation(rng, window, beams, *ctx.rs, sc.sigma_sq,
                                                Hypothesis::h1, ctx.rx, ctx.tx);
        const auto res = glrt_statistic(obs, *ctx.rs);
        return !(res.statistic > ctx.gamma);
    }
    const int n_slot = sc.frame.n_slot();
    const int tau0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_slot)));
    const auto wf = synthesize_waveform(rng, window, beams, *ctx.rs, sc.frame, sc.sigma_sq,
                                        tau0, Hypothesis::h1, ctx.rx, ctx.tx);
    const auto entries = detect_sweep(wf, *ctx.rs, ctx.gamma, sc.frame, ctx.l);
    int argmax = 0;
    for (const auto& e : entries) {
        if (e.statistic > entries[static_cast<std::size_t>(argmax)].statistic) argmax = e.lag;
    }
    return !(entries[static_cast<std::size_t>(tau0)].decision && argmax == tau0);
}

double deterministic_dominant_level(const TrialContext& ctx) {
    const auto& sc = *ctx.scenario;
    const auto& seq = ctx.codebook->slot_sequence;
    const auto j_total = seq.size();
    const double step = 0.1 * kDegToRad;
    double level = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(std::ceil((sc.sector_hi() - sc.sector_lo()) / step));
    std::vector<double> gains(j_total);
    for (int i = 0; i <= n; ++i) {
        const double phi = std::min(sc.sector_hi(), sc.sector_lo() + i * step);
        const auto v = steering_vector(ctx.tx, phi);
        for (std::size_t j = 0; j < j_total; ++j) {
            gains[j] = std::norm(
                kernels::cdot(v.data(), seq[j].w.data(), seq[j].w.size()));
        }
        // worst slot-phase alignment of an L-slot window
        double worst_avg = std::numeric_limits<double>::infinity();
        for (std::size_t phase = 0; phase < j_total; ++phase) {
            double acc = 0.0;
            for (int li = 0; li < ctx.l; ++li) {
                acc += gains[(phase + static_cast<std::size_t>(li)) % j_total];
            }
            worst_avg = std::min(worst_avg, acc / ctx.l);
        }
        ChannelConfig cfg;
        cfg.q_paths = sc.q_paths;
        cfg.dominant_ratio_db = sc.dominant_ratio_db;
        cfg.pathloss = ctx.profile.alpha(phi);
        const double dom = cfg.dominant_power() * ctx.rx.n_elements * worst_avg;
        level = std::min(level, dom);
    }
    return level;
}

double row_bound(const TrialContext& ctx, std::uint64_t bound_seed, int workers) {
    const auto& sc = *ctx.scenario;
    ncf::FadingBoundInput input;
    input.xi_grid = ncf::default_xi_grid();
    input.link = ncf::FadingLink{sc.p_t, sc.sigma_sq, sc.n_r, ctx.l,
                                 static_cast<int>(ctx.rs->samples.size()), ctx.gamma};
    switch (sc.bound_mode) {
        case BoundMode::none:
            return std::numeric_limits<double>::quiet_NaN();
        case BoundMode::deterministic_dominant: {
            const double level = deterministic_dominant_level(ctx);
            input.quantile_fn = [level](double) { return level; };
            return ncf::fading_upper_bound(input).bound;
        }
        case BoundMode::empirical: {
            auto table = ncf::channel_gain_quantile(
                [&ctx](RngStream& rng) {
                    return draw_lambda(rng, ctx, nullptr, nullptr) /
                           (2.0 * ctx.rs->energy() * ctx.l / ctx.scenario->sigma_sq);
                },
                input.xi_grid, sc.bound_trials, bound_seed, workers);
            input.quantile_fn = [table](double xi) { return table(xi); };
            return ncf::fading_upper_bound(input).bound;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::vector<ResultRow> run_miss_sweep(const Scenario& scenario, int workers) {
    scenario.validate();
    const auto prepared = prepare_codebook(scenario);
    const int n_s = scenario.frame.n_s();
    const auto rs = generate_rs(n_s, scenario.p_t, scenario.rs_kind, scenario.master_seed);
    const UlaConfig rx{scenario.n_r};
    const UlaConfig tx{scenario.n_t};

    // Per-condition link data computed once; rows come out ordered by
    // (L, condition) with conditions in scenario order.
    struct ConditionData {
        double snr_db;
        beam::PathlossProfile profile;
        double min_eta;
    };
    std::vector<ConditionData> conditions;
    conditions.reserve(scenario.snr_rs_db.size());
    const ldp::LinkBudget budget{scenario.p_t, scenario.sigma_sq, scenario.n_r, n_s};
    const auto avg_gain = [&](double phi) {
        const auto v = steering_vector(tx, phi);
        double acc = 0.0;
        for (const auto& b : prepared.slot_sequence) {
            acc += std::norm(kernels::cdot(v.data(), b.w.data(), b.w.size()));
        }
        return acc / static_cast<double>(prepared.slot_sequence.size());
    };
    for (double snr_db : scenario.snr_rs_db) {
        const double alpha_ref = alpha_ref_for_snr(scenario, snr_db);
        auto profile = scenario_pathloss(scenario, alpha_ref);
        double min_eta = std::numeric_limits<double>::infinity();
        const double step = 0.1 * kDegToRad;
        const int n = static_cast<int>(
            std::ceil((scenario.sector_hi() - scenario.sector_lo()) / step));
        for (int i = 0; i <= n; ++i) {
            const double phi =
                std::min(scenario.sector_hi(), scenario.sector_lo() + i * step);
            const auto dl = ldp::eta_for_direction(
                phi, avg_gain, [&](double a) { return profile.alpha(a); }, budget);
            min_eta = std::min(min_eta, dl.eta);
        }
        conditions.push_back(ConditionData{snr_db, std::move(profile), min_eta});
    }

    std::vector<int> l_sorted = scenario.l_list;
    std::stable_sort(l_sorted.begin(), l_sorted.end());

    std::vector<ResultRow> rows;
    rows.reserve(conditions.size() * l_sorted.size());
    std::size_t row_index = 0;

    for (int l : l_sorted) {
        for (const auto& cond : conditions) {
            const double snr_db = cond.snr_db;
            const auto& profile = cond.profile;
            const double min_eta = cond.min_eta;
            TrialContext ctx{&scenario, &prepared, &rs, profile, rx, tx, l, 0.0,
                             ncf::DetectorDims{scenario.n_r, l, n_s}};
            ctx.gamma = threshold_for_pfa(ThresholdSpec{scenario.p_fa, scenario.frame.n_slot()},
                                          ctx.dims);

            ResultRow row;
            row.scenario_id = scenario.id;
            row.l = l;
            {
                std::ostringstream cond;
                cond << "snr_db=" << snr_db;
                row.condition = cond.str();
            }
            row.trials = scenario.trials;
            row.seed = scenario.master_seed;

            const std::uint64_t stream_base = (static_cast<std::uint64_t>(row_index) + 1)
                                              << 40;
            if (scenario.estimator == Estimator::conditional) {
                std::vector<double> p(static_cast<std::size_t>(scenario.trials));
                parallel_trials(scenario.trials, workers, [&](long i) {
                    RngStream rng(scenario.master_seed,
                                  stream_base + static_cast<std::uint64_t>(i));
                    p[static_cast<std::size_t>(i)] = conditional_trial(rng, ctx);
                });
                double sum = 0.0, sum_sq = 0.0;
                for (double v : p) {
                    sum += v;
                    sum_sq += v * v;
                }
                const double mean = sum / static_cast<double>(scenario.trials);
                const double var = std::max(
                    0.0, sum_sq / static_cast<double>(scenario.trials) - mean * mean);
                row.p_miss = mean;
                const auto ci = mean_ci(mean, std::sqrt(var), scenario.trials);
                row.ci_lo = ci.lo;
                row.ci_hi = ci.hi;
            } else {
                std::vector<unsigned char> miss(static_cast<std::size_t>(scenario.trials));
                parallel_trials(scenario.trials, workers, [&](long i) {
                    RngStream rng(scenario.master_seed,
                                  stream_base + static_cast<std::uint64_t>(i));
                    miss[static_cast<std::size_t>(i)] = empirical_trial(rng, ctx) ? 1 : 0;
                });
                long count = 0;
                for (auto v : miss) count += v;
                row.p_miss = static_cast<double>(count) / static_cast<double>(scenario.trials);
                const auto ci = wilson_ci(static_cast<double>(count), scenario.trials);
                row.ci_lo = ci.lo;
                row.ci_hi = ci.hi;
            }

            row.lemma1_bound =
                row_bound(ctx, scenario.master_seed + 0x5bd1e995ULL + row_index, workers);
            if (std::isfinite(min_eta) && min_eta > 0.0) {
                row.ldp_approx = ldp::miss_approx(
                    l, ldp::rate_function(min_eta, ctx.gamma, scenario.n_r, n_s));
            } else {
                row.ldp_approx = 1.0;
            }
            rows.push_back(std::move(row));
            ++row_index;
        }
    }
    return rows;
}

ResultRow run_fa_calibration(const Scenario& scenario, int workers) {
    scenario.validate();
    const int n_s = scenario.frame.n_s();
    const int n_slot = scenario.frame.n_slot();
    const auto rs = generate_rs(n_s, scenario.p_t, scenario.rs_kind, scenario.master_seed);
    const int l = scenario.l_list.front();
    const ncf::DetectorDims dims{scenario.n_r, l, n_s};
    const double gamma =
        threshold_for_pfa(ThresholdSpec{scenario.p_fa, n_slot}, dims);

    std::vector<unsigned char> any_fa(static_cast<std::size_t>(scenario.trials));
    parallel_trials(scenario.trials, workers, [&](long i) {
        RngStream rng(scenario.master_seed, static_cast<std::uint64_t>(i) + 1);
        WaveformBuffer wf;
        wf.n_rx = scenario.n_r;
        wf.n_samples = (static_cast<std::size_t>(l) + 1) * static_cast<std::size_t>(n_slot);
        wf.data.resize(static_cast<std::size_t>(wf.n_rx) * wf.n_samples);
        for (auto& z : wf.data) z = rng.complex_normal(scenario.sigma_sq);
        const auto entries = detect_sweep(wf, rs, gamma, scenario.frame, l);
        unsigned char hit = 0;
        for (const auto& e : entries) {
            if (e.decision) {
                hit = 1;
                break;
            }
        }
        any_fa[static_cast<std::size_t>(i)] = hit;
    });
    long count = 0;
    for (auto v : any_fa) count += v;

    ResultRow row;
    row.scenario_id = scenario.id;
    row.l = l;
    row.condition = "h0-sweep";
    row.p_miss = static_cast<double>(count) / static_cast<double>(scenario.trials);
    const auto ci = wilson_ci(static_cast<double>(count), scenario.trials);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    row.lemma1_bound = scenario.p_fa; // union-bound target for this row
    row.ldp_approx = std::numeric_limits<double>::quiet_NaN();
    row.trials = scenario.trials;
    row.seed = scenario.master_seed;
    return row;
}

void emit_results(const std::vector<ResultRow>& rows, Format format,
                  const std::filesystem::path& path) {
    if (rows.empty()) throw std::invalid_argument("no rows to emit");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results file: " + path.string());

    if (format == Format::csv) {
        out << "scenario_id,L,condition,p_miss,ci_lo,ci_hi,lemma1_bound,ldp_approx,trials,seed\n";
        for (const auto& r : rows) {
            out << r.scenario_id << ',' << r.l << ',' << r.condition << ','
                << format_double(r.p_miss) << ',' << format_double(r.ci_lo) << ','
                << format_double(r.ci_hi) << ',' << format_double(r.lemma1_bound) << ','
                << format_double(r.ldp_approx) << ',' << r.trials << ',' << r.seed << '\n';
        }
        return;
    }

    nlohmann::json j;
    j["schema_version"] = 1;
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["scenario_id"] = r.scenario_id;
        row["L"] = r.l;
        row["condition"] = r.condition;
        row["p_miss"] = r.p_miss;
        row["ci_lo"] = r.ci_lo;
        row["ci_hi"] = r.ci_hi;
        row["lemma1_bound"] = r.lemma1_bound;
        row["ldp_approx"] = r.ldp_approx;
        row["trials"] = r.trials;
        row["seed"] = r.seed;
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    out << j.dump(2) << '\n';
}

namespace {

double parse_double_or_nan(const std::string& s) {
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

} // namespace

std::vector<ResultRow> parse_results(Format format, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read results file: " + path.string());
    std::vector<ResultRow> rows;

    if (format == Format::csv) {
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            if (fields.size() != 10) throw std::runtime_error("malformed results CSV row");
            ResultRow r;
            r.scenario_id = fields[0];
            r.l = std::stoi(fields[1]);
            r.condition = fields[2];
            r.p_miss = parse_double_or_nan(fields[3]);
            r.ci_lo = parse_double_or_nan(fields[4]);
            r.ci_hi = parse_double_or_nan(fields[5]);
            r.lemma1_bound = parse_double_or_nan(fields[6]);
            r.ldp_approx = parse_double_or_nan(fields[7]);
            r.trials = std::stol(fields[8]);
            r.seed = std::stoull(fields[9]);
            rows.push_back(std::move(r));
        }
        return rows;
    }

    nlohmann::json j;
    in >> j;
    for (const auto& row : j.at("rows")) {
        ResultRow r;
        r.scenario_id = row.at("scenario_id").get<std::string>();
        r.l = row.at("L").get<int>();
        r.condition = row.at("condition").get<std::string>();
        const auto num = [&](const char* key) {
            const auto& v = row.at(key);
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                               : v.get<double>();
        };
        r.p_miss = num("p_miss");
        r.ci_lo = num("ci_lo");
        r.ci_hi = num("ci_hi");
        r.lemma1_bound = num("lemma1_bound");
        r.ldp_approx = num("ldp_approx");
        r.trials = row.at("trials").get<long>();
        r.seed = row.at("seed").get<std::uint64_t>();
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace mmwave::sim
