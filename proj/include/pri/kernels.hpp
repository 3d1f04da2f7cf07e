#pragma once

// Arithmetic inner loops with a scalar reference and SIMD variants. The
// variant is chosen once at first use from the CPU features; setting
// PRI_SIMD=scalar in the environment pins the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace pri::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
// Overrides the dispatch choice; throws if the ISA is not available here.
void force_isa(Isa isa);

// out[r] = sum_j matrix[r * cols + j] * vec[j], matrix row-major rows x cols.
void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> vec, std::span<double> out);
double sum(std::span<const double> x);
// sum_i (x_i - mean)^2
double sum_sq_dev(std::span<const double> x, double mean);

namespace scalar {
void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out);
double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double mean);
}  // namespace scalar

namespace avx2 {
bool compiled();
void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out);
double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double mean);
}  // namespace avx2

namespace neon {
bool compiled();
void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out);
double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double mean);
}  // namespace neon

}  // namespace pri::kernels
