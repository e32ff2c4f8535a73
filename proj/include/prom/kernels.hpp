#pragma once

#include <cstddef>
#include <string>

// Hot arithmetic kernels behind a runtime-dispatched function table.
// Scalar versions are the reference; the AVX2 set is selected on CPUs with
// AVX2+FMA and must agree with scalar to roundoff (see tests/test_kernels.cpp).

namespace prom::kernels {

enum class Backend { Auto, Scalar, Avx2 };

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*nrm2sq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scal_copy)(double, const double*, double*, std::size_t);
    // y = A x with A row-major (rows x cols); y must not alias A or x
    void (*gemv_row)(const double*, std::size_t, std::size_t, const double*, double*);
    // out[i(i+1)/2 + j] = scale * q[i] * q[j] for j <= i
    void (*compressed_square)(const double*, std::size_t, double, double*);
    // out = q + (dt/6) * (k1 + 2 k2 + 2 k3 + k4)
    void (*rk4_combine)(const double*, const double*, const double*, const double*,
                        const double*, double, double*, std::size_t);
    // acc += (x - mean)^2, elementwise
    void (*sq_diff_accum)(const double*, const double*, double*, std::size_t);
    const char* name;
};

const KernelTable& table();
void set_backend(Backend b);
std::string backend_name();
bool avx2_available();

inline double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
inline double nrm2sq(const double* x, std::size_t n) { return table().nrm2sq(x, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }
inline void scal_copy(double a, const double* x, double* y, std::size_t n) { table().scal_copy(a, x, y, n); }
inline void gemv_row(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    table().gemv_row(a, rows, cols, x, y);
}
inline void compressed_square(const double* q, std::size_t r, double scale, double* out) {
    table().compressed_square(q, r, scale, out);
}
inline void rk4_combine(const double* q, const double* k1, const double* k2, const double* k3,
                        const double* k4, double dt, double* out, std::size_t n) {
    table().rk4_combine(q, k1, k2, k3, k4, dt, out, n);
}
inline void sq_diff_accum(const double* x, const double* mean, double* acc, std::size_t n) {
    table().sq_diff_accum(x, mean, acc, n);
}

namespace detail {
extern const KernelTable scalar_table;
extern const KernelTable avx2_table;  // null-named when built without AVX2 support
}

}  // namespace prom::kernels
