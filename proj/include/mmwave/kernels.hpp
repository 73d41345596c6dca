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

#include <complex>
#include <cstddef>

namespace mmwave::kernels {

using cxd = std::complex<double>;

/// The arithmetic inner loops of the detector and the channel generators:
/// complex dot products, squared norms and rank-one accumulation over
/// interleaved complex-double buffers. Each kernel has a scalar reference
/// implementation and an AVX2 variant; the best supported variant is selected
/// once at startup. The scalar path is the semantic reference and the SIMD
/// paths are equivalence-tested against it.

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);

/// Overrides the dispatch, e.g. to compare backends in tests. Throws
/// std::invalid_argument if the backend is not supported on this host.
/// The MMWAVE_KERNELS environment variable ("scalar" or "avx2") applies the
/// same override at startup.
void force_backend(Backend b);

/// Restores the auto-detected backend.
void reset_backend();

/// sum_i a[i] * b[i]
cxd cdot(const cxd* a, const cxd* b, std::size_t n);

/// sum_i a[i] * conj(b[i])
cxd cdot_conj(const cxd* a, const cxd* b, std::size_t n);

/// sum_i |a[i]|^2
double sum_abs2(const cxd* a, std::size_t n);

/// y[i] += alpha * x[i]
void caxpy(cxd alpha, const cxd* x, cxd* y, std::size_t n);

namespace detail {
cxd cdot_scalar(const cxd* a, const cxd* b, std::size_t n);
cxd cdot_conj_scalar(const cxd* a, const cxd* b, std::size_t n);
double sum_abs2_scalar(const cxd* a, std::size_t n);
void caxpy_scalar(cxd alpha, const cxd* x, cxd* y, std::size_t n);

#if defined(MMWAVE_HAVE_AVX2_TU)
cxd cdot_avx2(const cxd* a, const cxd* b, std::size_t n);
cxd cdot_conj_avx2(const cxd* a, const cxd* b, std::size_t n);
double sum_abs2_avx2(const cxd* a, std::size_t n);
void caxpy_avx2(cxd alpha, const cxd* x, cxd* y, std::size_t n);
#endif
} // namespace detail

} // namespace mmwave::kernels
