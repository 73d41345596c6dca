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

#include "mmwave/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace mmwave::kernels {

namespace {

struct DispatchTable {
    cxd (*cdot)(const cxd*, const cxd*, std::size_t);
    cxd (*cdot_conj)(const cxd*, const cxd*, std::size_t);
    double (*sum_abs2)(const cxd*, std::size_t);
    void (*caxpy)(cxd, const cxd*, cxd*, std::size_t);
};

constexpr DispatchTable kScalarTable{
    &detail::cdot_scalar, &detail::cdot_conj_scalar,
    &detail::sum_abs2_scalar, &detail::caxpy_scalar};

// TODO: add a NEON table once an arm64 build target is available to test it.
#if defined(MMWAVE_HAVE_AVX2_TU)
constexpr DispatchTable kAvx2Table{
    &detail::cdot_avx2, &detail::cdot_conj_avx2,
    &detail::sum_abs2_avx2, &detail::caxpy_avx2};

bool host_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool host_has_avx2() { return false; }
#endif

Backend detect_backend() {
    if (const char* env = std::getenv("MMWAVE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && host_has_avx2()) return Backend::avx2;
    }
    return host_has_avx2() ? Backend::avx2 : Backend::scalar;
}

const DispatchTable& table_for(Backend b) {
#if defined(MMWAVE_HAVE_AVX2_TU)
    if (b == Backend::avx2) return kAvx2Table;
#endif
    (void)b;
    return kScalarTable;
}

Backend g_backend = detect_backend();
const DispatchTable* g_table = &table_for(g_backend);

} // namespace

Backend active_backend() { return g_backend; }

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return host_has_avx2();
    }
    return false;
}

void force_backend(Backend b) {
    if (!backend_supported(b)) {
        throw std::invalid_argument("kernel backend not supported on this host");
    }
    g_backend = b;
    g_table = &table_for(b);
}

void reset_backend() {
    g_backend = detect_backend();
    g_table = &table_for(g_backend);
}

cxd cdot(const cxd* a, const cxd* b, std::size_t n) { return g_table->cdot(a, b, n); }
cxd cdot_conj(const cxd* a, const cxd* b, std::size_t n) { return g_table->cdot_conj(a, b, n); }
double sum_abs2(const cxd* a, std::size_t n) { return g_table->sum_abs2(a, n); }
void caxpy(cxd alpha, const cxd* x, cxd* y, std::size_t n) { g_table->caxpy(alpha, x, y, n); }

} // namespace mmwave::kernels
