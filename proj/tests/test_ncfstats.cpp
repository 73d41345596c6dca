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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mmwave/errors.hpp"
#include "mmwave/ncfstats.hpp"
#include "support/oracle_stats.hpp"

using namespace mmwave;
using ncf::NcfParams;

TEST_CASE("central F special cases") {
    const NcfParams f22{2.0, 2.0, 0.0};
    CHECK(ncf::ncf_cdf(-1.0, f22) == 0.0);
    CHECK(ncf::ncf_cdf(0.0, f22) == 0.0);
    // CDF of F(2,2) is x/(x+1)
    for (double x : {0.25, 1.0, 3.0, 10.0}) {
        CHECK(ncf::ncf_cdf(x, f22) == Catch::Approx(x / (x + 1.0)).epsilon(1e-12));
    }
    CHECK(ncf::f_quantile(0.5, f22) == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("noncentral values against an independent implementation") {
    // reference values computed with SciPy's ncfdtr
    CHECK(ncf::ncf_cdf(1.5, NcfParams{8.0, 40.0, 12.0}) ==
          Catch::Approx(0.16866907629652084).epsilon(1e-10));
    CHECK(ncf::ncf_cdf(2.0, NcfParams{5.5, 11.5, 7.25}) ==
          Catch::Approx(0.4254778008125395).epsilon(1e-10));
}

TEST_CASE("survival function complements the CDF without cancellation") {
    RngStream rng(3);
    for (int i = 0; i < 50; ++i) {
        const NcfParams p{rng.uniform(1.0, 50.0), rng.uniform(1.0, 200.0),
                          rng.uniform(0.0, 60.0)};
        const double x = rng.uniform(0.01, 8.0);
        CHECK(ncf::ncf_cdf(x, p) + ncf::ncf_sf(x, p) == Catch::Approx(1.0).margin(1e-12));
    }
    // far upper tail of a large-dof central F; reference value from SciPy
    const NcfParams big{320.0, 31680.0, 0.0};
    CHECK(ncf::ncf_sf(1.4567555939522203, big) ==
          Catch::Approx(2.0e-7).epsilon(1e-6));
}

TEST_CASE("quantile round trip") {
    RngStream rng(5);
    for (int i = 0; i < 25; ++i) {
        const NcfParams p{rng.uniform(1.0, 40.0), rng.uniform(2.0, 150.0),
                          rng.uniform(0.0, 40.0)};
        const double x = rng.uniform(0.05, 6.0);
        const double prob = ncf::ncf_cdf(x, p);
        if (prob <= 1e-14 || prob >= 1.0 - 1e-14) continue;
        CHECK(ncf::f_quantile(prob, p) == Catch::Approx(x).epsilon(1e-8));
    }
    CHECK_THROWS_AS(ncf::f_quantile(0.0, NcfParams{2, 2, 0}), std::invalid_argument);
}

TEST_CASE("CDF is monotone in x and decreasing in the noncentrality") {
    RngStream rng(7);
    for (int i = 0; i < 30; ++i) {
        const double n1 = rng.uniform(1.0, 60.0);
        const double n2 = rng.uniform(2.0, 300.0);
        const double lam = rng.uniform(0.0, 80.0);
        double prev = -1.0;
        for (double x = 0.1; x < 5.0; x += 0.35) {
            const double c = ncf::ncf_cdf(x, NcfParams{n1, n2, lam});
            CHECK(c >= prev - 1e-14);
            prev = c;
        }
        const double x = rng.uniform(0.3, 4.0);
        const double c_low = ncf::ncf_cdf(x, NcfParams{n1, n2, lam});
        const double c_high = ncf::ncf_cdf(x, NcfParams{n1, n2, lam + 15.0});
        CHECK(c_high < c_low + 1e-14);
    }
}

TEST_CASE("large noncentrality series still converges") {
    const NcfParams p{16.0, 160.0, 5000.0};
    const double v = ncf::ncf_cdf(1.0, p);
    CHECK(v >= 0.0);
    CHECK(v < 1e-6);
    CHECK(ncf::ncf_cdf(400.0, p) > 0.97);
    // mid-bulk value cross-checked against SciPy's ncfdtr
    CHECK(ncf::ncf_cdf(313.0, p) == Catch::Approx(0.4809704956084744).epsilon(1e-9));
    // miss probability far below the bulk collapses to zero
    CHECK(ncf::miss_prob(0.5, ncf::DetectorDims{2, 4, 8}, 1e6) < 1e-12);
}

TEST_CASE("CDF matches a chi-square ratio sampler", "[slow]") {
    RngStream rng(11);
    const NcfParams p{8.0, 40.0, 12.0};
    const double x = 1.5;
    const int n = 1000000;
    long count = 0;
    for (int i = 0; i < n; ++i) {
        if (oracle::sample_ncf(rng, p.n1, p.n2, p.lambda) <= x) ++count;
    }
    const double mc = static_cast<double>(count) / n;
    const double se = std::sqrt(mc * (1.0 - mc) / n);
    CHECK(std::fabs(ncf::ncf_cdf(x, p) - mc) <= 4.0 * se);
}

TEST_CASE("miss probability wraps the scaled CDF") {
    const ncf::DetectorDims dims{2, 4, 8};
    const double gamma = 0.5;
    CHECK(ncf::miss_prob(gamma, dims, 3.0) ==
          Catch::Approx(ncf::ncf_cdf((8 - 1) * gamma, NcfParams{16.0, 112.0, 3.0}))
              .epsilon(1e-14));
    CHECK(ncf::miss_prob(gamma, dims, 1e6) < 1e-12);
    CHECK_THROWS_AS(ncf::miss_prob(-1.0, dims, 0.0), std::invalid_argument);
}

TEST_CASE("fading bound with a deterministic channel hits the F term") {
    ncf::FadingBoundInput input;
    input.xi_grid = ncf::default_xi_grid();
    const double h_const = 0.08;
    input.quantile_fn = [h_const](double) { return h_const; };
    input.link = ncf::FadingLink{1.0, 1.0, 4, 6, 16, 0.05};
    const auto fb = ncf::fading_upper_bound(input);

    const ncf::DetectorDims dims{4, 6, 16};
    const double eta = 2.0 * 16.0 * h_const;
    const double f_term = ncf::miss_prob(0.05, dims, 6.0 * eta);
    const double xi_min = input.xi_grid.front();
    CHECK(fb.best_xi == Catch::Approx(xi_min));
    CHECK(fb.bound == Catch::Approx(xi_min + (1 - xi_min) * f_term).epsilon(1e-12));
}

TEST_CASE("fading bound equals an exhaustive scan on a two-point law") {
    // two-point mean-gain law: 0.5 w.p. 0.5, else 1.5
    const auto quant = [](double xi) { return xi <= 0.5 ? 0.5 : 1.5; };
    ncf::FadingBoundInput input;
    input.xi_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    input.quantile_fn = quant;
    input.link = ncf::FadingLink{1.0, 1.0, 2, 3, 8, 0.2};
    const auto fb = ncf::fading_upper_bound(input);

    const ncf::DetectorDims dims{2, 3, 8};
    double best = 2.0;
    double best_xi = 0.0;
    for (double xi : input.xi_grid) {
        const double term =
            xi + (1 - xi) * ncf::miss_prob(0.2, dims, 3.0 * 2.0 * 8.0 * quant(xi));
        if (term < best) {
            best = term;
            best_xi = xi;
        }
    }
    CHECK(fb.bound == Catch::Approx(best).epsilon(1e-14));
    CHECK(fb.best_xi == Catch::Approx(best_xi));

    // any single grid point upper-bounds the minimized value
    for (double xi : input.xi_grid) {
        const double term =
            xi + (1 - xi) * ncf::miss_prob(0.2, dims, 3.0 * 2.0 * 8.0 * quant(xi));
        CHECK(term >= fb.bound - 1e-15);
    }
}

TEST_CASE("quantile table basics") {
    // constant statistic: every quantile equals it
    const auto table = ncf::channel_gain_quantile([](RngStream&) { return 2.5; },
                                                  {0.0005, 0.1, 0.5, 0.9}, 1000, 42, 1);
    for (double v : table.value) CHECK(v == 2.5);
    CHECK(table.extrapolated[0]); // below the 1/trials resolution
    CHECK_FALSE(table.extrapolated[2]);

    // worker-count independence
    const auto draw = [](RngStream& rng) { return rng.uniform(); };
    const auto t1 = ncf::channel_gain_quantile(draw, {0.05, 0.5, 0.95}, 5000, 9, 1);
    const auto t3 = ncf::channel_gain_quantile(draw, {0.05, 0.5, 0.95}, 5000, 9, 3);
    for (std::size_t i = 0; i < t1.value.size(); ++i) CHECK(t1.value[i] == t3.value[i]);
}

TEST_CASE("quantiles of an exponential law match the closed form", "[slow]") {
    const double mean = 1.7;
    const auto draw = [mean](RngStream& rng) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        return -mean * std::log1p(-u);
    };
    const std::vector<double> xi{0.1, 0.25, 0.5, 0.75, 0.9};
    const auto table = ncf::channel_gain_quantile(draw, xi, 100000, 31, 2);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double expected = -mean * std::log1p(-xi[i]);
        CHECK(table.value[i] == Catch::Approx(expected).epsilon(0.02));
        if (i > 0) CHECK(table.value[i] >= table.value[i - 1]);
    }
}

TEST_CASE("bound dominates a direct simulation of the fading miss rate", "[slow]") {
    // mean gain is exponential (single Rayleigh path, n_r = l = 1)
    RngStream master(77);
    for (int rep = 0; rep < 3; ++rep) {
        const double mean_gain = master.uniform(0.5, 2.0);
        const double gamma = master.uniform(0.3, 0.8);
        const int l = 1, n_r = 1, n_s = 8;
        const ncf::DetectorDims dims{n_r, l, n_s};

        const auto draw = [mean_gain](RngStream& rng) {
            double u = rng.uniform();
            while (u <= 0.0) u = rng.uniform();
            return -mean_gain * std::log1p(-u);
        };
        const auto table = ncf::channel_gain_quantile(draw, ncf::default_xi_grid(), 50000,
                                                      100 + static_cast<std::uint64_t>(rep), 2);
        ncf::FadingBoundInput input;
        input.xi_grid = ncf::default_xi_grid();
        input.quantile_fn = [&table](double xi) { return table(xi); };
        input.link = ncf::FadingLink{1.0, 1.0, n_r, l, n_s, gamma};
        const auto fb = ncf::fading_upper_bound(input);

        const int trials = 20000;
        double p_acc = 0.0;
        for (int i = 0; i < trials; ++i) {
            RngStream rng(5000 + static_cast<std::uint64_t>(rep * trials + i));
            const double lam = 2.0 * n_s * draw(rng) * l;
            p_acc += ncf::miss_prob(gamma, dims, lam);
        }
        const double p_sim = p_acc / trials;
        const double se = std::sqrt(p_sim * (1.0 - p_sim) / trials);
        CHECK(fb.bound >= p_sim - 3.0 * se);
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(ncf::ncf_cdf(1.0, NcfParams{0.0, 2.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ncf::ncf_cdf(1.0, NcfParams{2.0, 2.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ncf::betainc(0.0, 1.0, 0.5), std::invalid_argument);
    ncf::FadingBoundInput empty;
    empty.link = ncf::FadingLink{1.0, 1.0, 1, 1, 4, 0.5};
    CHECK_THROWS_AS(ncf::fading_upper_bound(empty), std::invalid_argument);
}
