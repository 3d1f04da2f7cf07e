#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pri/kernels.hpp"

namespace pri::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("PRI_SIMD"); env && std::string(env) == "scalar") return Isa::scalar;
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<int>& selected() {
    static std::atomic<int> isa{static_cast<int>(detect())};
    return isa;
}

void check(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string("kernel size mismatch: ") + what);
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return avx2::compiled() && cpu_has_avx2_fma();
        case Isa::neon: return neon::compiled();
    }
    return false;
}

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
    if (!isa_available(isa)) throw std::invalid_argument("ISA not available: " + std::string(isa_name(isa)));
    selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols, std::span<const double> vec,
            std::span<double> out) {
    check(matrix.size(), rows * cols, "matrix");
    check(vec.size(), cols, "vector");
    check(out.size(), rows, "output");
    switch (active_isa()) {
        case Isa::avx2: return avx2::matvec(matrix.data(), rows, cols, vec.data(), out.data());
        case Isa::neon: return neon::matvec(matrix.data(), rows, cols, vec.data(), out.data());
        case Isa::scalar: break;
    }
    scalar::matvec(matrix.data(), rows, cols, vec.data(), out.data());
}

double sum(std::span<const double> x) {
    switch (active_isa()) {
        case Isa::avx2: return avx2::sum(x.data(), x.size());
        case Isa::neon: return neon::sum(x.data(), x.size());
        case Isa::scalar: break;
    }
    return scalar::sum(x.data(), x.size());
}

double sum_sq_dev(std::span<const double> x, double mean) {
    switch (active_isa()) {
        case Isa::avx2: return avx2::sum_sq_dev(x.data(), x.size(), mean);
        case Isa::neon: return neon::sum_sq_dev(x.data(), x.size(), mean);
        case Isa::scalar: break;
    }
    return scalar::sum_sq_dev(x.data(), x.size(), mean);
}

}  // namespace pri::kernels
