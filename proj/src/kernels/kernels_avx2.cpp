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

// AVX2 + FMA kernels over interleaved complex doubles. Each __m256d holds two
// complex values [re0, im0, re1, im1]. This translation unit is the only one
// compiled with -mavx2 -mfma; callers reach it through the dispatch table.

#include "mmwave/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace mmwave::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Sign masks that flip the imaginary (odd) or real (even) lanes.
inline __m256d neg_odd() { return _mm256_setr_pd(0.0, -0.0, 0.0, -0.0); }
inline __m256d neg_even() { return _mm256_setr_pd(-0.0, 0.0, -0.0, 0.0); }

} // namespace

cxd cdot_avx2(const cxd* a, const cxd* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
    __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    const __m256d flip = neg_odd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
        const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
        const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
        // re lanes: [ar*br, -ai*bi]; im lanes: [ai*br, ar*bi]
        re0 = _mm256_fmadd_pd(va0, _mm256_xor_pd(vb0, flip), re0);
        re1 = _mm256_fmadd_pd(va1, _mm256_xor_pd(vb1, flip), re1);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(va0, 0x5), vb0, im0);
        im1 = _mm256_fmadd_pd(_mm256_permute_pd(va1, 0x5), vb1, im1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        re0 = _mm256_fmadd_pd(va, _mm256_xor_pd(vb, flip), re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(va, 0x5), vb, im0);
    }
    double re = hsum(_mm256_add_pd(re0, re1));
    double im = hsum(_mm256_add_pd(im0, im1));
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
    }
    return {re, im};
}

cxd cdot_conj_avx2(const cxd* a, const cxd* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
    __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    const __m256d flip = neg_odd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
        const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
        const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
        // re lanes: [ar*br, ai*bi]; im lanes: [ai*br, -ar*bi]
        re0 = _mm256_fmadd_pd(va0, vb0, re0);
        re1 = _mm256_fmadd_pd(va1, vb1, re1);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(va0, 0x5), _mm256_xor_pd(vb0, flip), im0);
        im1 = _mm256_fmadd_pd(_mm256_permute_pd(va1, 0x5), _mm256_xor_pd(vb1, flip), im1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        re0 = _mm256_fmadd_pd(va, vb, re0);
        im0 = _mm256_fmadd_pd(_mm256_permute_pd(va, 0x5), _mm256_xor_pd(vb, flip), im0);
    }
    double re = hsum(_mm256_add_pd(re0, re1));
    double im = hsum(_mm256_add_pd(im0, im1));
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
    }
    return {re, im};
}

double sum_abs2_avx2(const cxd* a, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = _mm256_loadu_pd(pa + 2 * i);
        const __m256d v1 = _mm256_loadu_pd(pa + 2 * i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        acc += ar * ar + ai * ai;
    }
    return acc;
}

void caxpy_avx2(cxd alpha, const cxd* x, cxd* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    double* py = reinterpret_cast<double*>(y);
    const __m256d vre = _mm256_set1_pd(alpha.real());
    const __m256d vim = _mm256_set1_pd(alpha.imag());
    const __m256d flip = neg_even();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(px + 2 * i);
        __m256d vy = _mm256_loadu_pd(py + 2 * i);
        // i*x = [-xi, xr]
        const __m256d rot = _mm256_xor_pd(_mm256_permute_pd(vx, 0x5), flip);
        vy = _mm256_fmadd_pd(vre, vx, vy);
        vy = _mm256_fmadd_pd(vim, rot, vy);
        _mm256_storeu_pd(py + 2 * i, vy);
    }
    const double pr = alpha.real(), pi = alpha.imag();
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cxd{pr * xr - pi * xi, pr * xi + pi * xr};
    }
}

} // namespace mmwave::kernels::detail

#endif // x86_64
