#include "pri/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace pri::kernels::neon {

bool compiled() { return true; }

void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = matrix + r * cols;
        float64x2_t acc0 = vdupq_n_f64(0.0);
        float64x2_t acc1 = vdupq_n_f64(0.0);
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            acc0 = vfmaq_f64(acc0, vld1q_f64(row + j), vld1q_f64(vec + j));
            acc1 = vfmaq_f64(acc1, vld1q_f64(row + j + 2), vld1q_f64(vec + j + 2));
        }
        double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
        for (; j < cols; ++j) acc += row[j] * vec[j];
        out[r] = acc;
    }
}

double sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_dev(const double* x, std::size_t n, double mean) {
    const float64x2_t m = vdupq_n_f64(mean);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), m);
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        s += d * d;
    }
    return s;
}

}  // namespace pri::kernels::neon

#else

namespace pri::kernels::neon {
bool compiled() { return false; }
void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out) {
    scalar::matvec(matrix, rows, cols, vec, out);
}
double sum(const double* x, std::size_t n) { return scalar::sum(x, n); }
double sum_sq_dev(const double* x, std::size_t n, double mean) { return scalar::sum_sq_dev(x, n, mean); }
}  // namespace pri::kernels::neon

#endif
