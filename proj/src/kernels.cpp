// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "raychan/kernels.hpp"

namespace raychan::kernels {

#ifndef RAYCHAN_HAVE_AVX2_TU
const KernelOps* avx2_ops() { return nullptr; }
#endif

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelOps& select_ops() {
    const char* env = std::getenv("RAYCHAN_KERNEL");
    const std::string requested = env ? env : "auto";
    if (requested == "scalar") return scalar_ops();
    if (requested == "avx2") {
        const KernelOps* ops = avx2_ops();
        if (!ops || !avx2_supported())
            throw std::runtime_error("RAYCHAN_KERNEL=avx2 requested but AVX2 is unavailable");
        return *ops;
    }
    if (requested != "auto")
        throw std::runtime_error("unknown RAYCHAN_KERNEL value: " + requested);
    const KernelOps* ops = avx2_ops();
    if (ops && avx2_supported()) return *ops;
    return scalar_ops();
}

}  // namespace

const KernelOps& active_ops() {
    static const KernelOps& ops = select_ops();
    return ops;
}

}  // namespace raychan::kernels
