#include "prom/kernels.hpp"

namespace prom::kernels::detail {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double nrm2sq_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_copy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void gemv_row_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void compressed_square_scalar(const double* q, std::size_t r, double scale, double* out) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < r; ++i) {
        const double qi = scale * q[i];
        for (std::size_t j = 0; j <= i; ++j) out[idx++] = qi * q[j];
    }
}

void rk4_combine_scalar(const double* q, const double* k1, const double* k2, const double* k3,
                        const double* k4, double dt, double* out, std::size_t n) {
    const double h = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = q[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void sq_diff_accum_scalar(const double* x, const double* mean, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean[i];
        acc[i] += d * d;
    }
}

}  // namespace

const KernelTable scalar_table = {
    dot_scalar,     nrm2sq_scalar,          axpy_scalar,        scal_copy_scalar,
    gemv_row_scalar, compressed_square_scalar, rk4_combine_scalar, sq_diff_accum_scalar,
    "scalar",
};

}  // namespace prom::kernels::detail
