#include "pri/kernels.hpp"

namespace pri::kernels::scalar {

void matvec(const double* matrix, std::size_t rows, std::size_t cols, const double* vec, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = matrix + r * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * vec[j];
        out[r] = acc;
    }
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_sq_dev(const double* x, std::size_t n, double mean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        acc += d * d;
    }
    return acc;
}

}  // namespace pri::kernels::scalar
