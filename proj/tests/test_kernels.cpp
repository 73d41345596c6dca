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

#include <complex>
#include <vector>

#include "mmwave/kernels.hpp"
#include "mmwave/rng.hpp"

using namespace mmwave;
using kernels::cxd;

namespace {

std::vector<cxd> random_vec(RngStream& rng, std::size_t n) {
    std::vector<cxd> v(n);
    for (auto& c : v) c = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return v;
}

} // namespace

TEST_CASE("scalar kernels match straightforward complex arithmetic") {
    RngStream rng(42);
    const auto a = random_vec(rng, 17);
    const auto b = random_vec(rng, 17);

    cxd dot{0.0, 0.0}, dotc{0.0, 0.0};
    double abs2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        dotc += a[i] * std::conj(b[i]);
        abs2 += std::norm(a[i]);
    }

    CHECK(std::abs(kernels::detail::cdot_scalar(a.data(), b.data(), a.size()) - dot) < 1e-13);
    CHECK(std::abs(kernels::detail::cdot_conj_scalar(a.data(), b.data(), a.size()) - dotc) <
          1e-13);
    CHECK(kernels::detail::sum_abs2_scalar(a.data(), a.size()) ==
          Catch::Approx(abs2).epsilon(1e-13));

    auto y = random_vec(rng, 17);
    auto y_ref = y;
    const cxd alpha{0.3, -1.2};
    kernels::detail::caxpy_scalar(alpha, a.data(), y.data(), y.size());
    for (std::size_t i = 0; i < y_ref.size(); ++i) y_ref[i] += alpha * a[i];
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(y[i] - y_ref[i]) < 1e-13);
    }
}

TEST_CASE("SIMD backends agree with the scalar reference") {
    if (!kernels::backend_supported(kernels::Backend::avx2)) {
        SUCCEED("no SIMD backend on this host");
        return;
    }
    RngStream rng(7);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 33u, 64u, 129u, 1000u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const double scale = 1.0 + kernels::detail::sum_abs2_scalar(a.data(), n);

        kernels::force_backend(kernels::Backend::avx2);
        const cxd dot_simd = kernels::cdot(a.data(), b.data(), n);
        const cxd dotc_simd = kernels::cdot_conj(a.data(), b.data(), n);
        const double abs2_simd = kernels::sum_abs2(a.data(), n);
        auto y_simd = random_vec(rng, n);
        auto y_ref = y_simd;
        const cxd alpha{-0.77, 0.31};
        kernels::caxpy(alpha, a.data(), y_simd.data(), n);
        kernels::reset_backend();

        const cxd dot_ref = kernels::detail::cdot_scalar(a.data(), b.data(), n);
        const cxd dotc_ref = kernels::detail::cdot_conj_scalar(a.data(), b.data(), n);
        const double abs2_ref = kernels::detail::sum_abs2_scalar(a.data(), n);
        kernels::detail::caxpy_scalar(alpha, a.data(), y_ref.data(), n);

        CHECK(std::abs(dot_simd - dot_ref) <= 1e-12 * scale);
        CHECK(std::abs(dotc_simd - dotc_ref) <= 1e-12 * scale);
        CHECK(std::fabs(abs2_simd - abs2_ref) <= 1e-12 * scale);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(y_simd[i] - y_ref[i]) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("forcing an unsupported backend throws") {
    if (kernels::backend_supported(kernels::Backend::avx2)) {
        SUCCEED("AVX2 available, nothing to reject here");
        return;
    }
    CHECK_THROWS_AS(kernels::force_backend(kernels::Backend::avx2), std::invalid_argument);
}
