// AVX2+FMA kernel set. This translation unit is compiled with -mavx2 -mfma;
// it is only entered at runtime when cpuid reports both features.

#include "prom/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define PROM_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define PROM_HAVE_AVX2_BUILD 0
#endif

namespace prom::kernels::detail {

#if PROM_HAVE_AVX2_BUILD

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double nrm2sq_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal_copy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

void gemv_row_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 8 <= cols; j += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(x + j + 4), acc1);
        }
        if (j + 4 <= cols) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
            j += 4;
        }
        double s = hsum(_mm256_add_pd(acc0, acc1));
        for (; j < cols; ++j) s += row[j] * x[j];
        y[r] = s;
    }
}

void compressed_square_avx2(const double* q, std::size_t r, double scale, double* out) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < r; ++i) {
        const double qi = scale * q[i];
        const __m256d vqi = _mm256_set1_pd(qi);
        const std::size_t len = i + 1;
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4)
            _mm256_storeu_pd(out + idx + j, _mm256_mul_pd(vqi, _mm256_loadu_pd(q + j)));
        for (; j < len; ++j) out[idx + j] = qi * q[j];
        idx += len;
    }
}

void rk4_combine_avx2(const double* q, const double* k1, const double* k2, const double* k3,
                      const double* k4, double dt, double* out, std::size_t n) {
    const double h = dt / 6.0;
    const __m256d vh = _mm256_set1_pd(h);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
        __m256d m = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
        s = _mm256_fmadd_pd(two, m, s);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vh, s, _mm256_loadu_pd(q + i)));
    }
    for (; i < n; ++i)
        out[i] = q[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void sq_diff_accum_avx2(const double* x, const double* mean, double* acc, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i));
        _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
    }
    for (; i < n; ++i) {
        const double d = x[i] - mean[i];
        acc[i] += d * d;
    }
}

}  // namespace

const KernelTable avx2_table = {
    dot_avx2,     nrm2sq_avx2,           axpy_avx2,        scal_copy_avx2,
    gemv_row_avx2, compressed_square_avx2, rk4_combine_avx2, sq_diff_accum_avx2,
    "avx2",
};

#else

const KernelTable avx2_table = {
    nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
};

#endif

}  // namespace prom::kernels::detail
