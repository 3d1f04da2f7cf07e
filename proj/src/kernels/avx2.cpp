// Built with -mavx2 -mfma; only entered after a runtime CPU check.
#include "pri/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace pri::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

bool compiled() { return true; }

void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = matrix + r * cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 8 <= cols; j += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(vec + j), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(vec + j + 4), acc1);
        }
        for (; j + 4 <= cols; j += 4)
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(vec + j), acc0);
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; j < cols; ++j) acc += row[j] * vec[j];
        out[r] = acc;
    }
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_dev(const double* x, std::size_t n, double mean) {
    const __m256d m = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        s += d * d;
    }
    return s;
}

}  // namespace pri::kernels::avx2

#else

namespace pri::kernels::avx2 {
bool compiled() { return false; }
void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out) {
    scalar::matvec(matrix, rows, cols, vec, out);
}
double sum(const double* x, std::size_t n) { return scalar::sum(x, n); }
double sum_sq_dev(const double* x, std::size_t n, double mean) { return scalar::sum_sq_dev(x, n, mean); }
}  // namespace pri::kernels::avx2

#endif
