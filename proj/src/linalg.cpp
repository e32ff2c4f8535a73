#include "prom/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "prom/kernels.hpp"

namespace prom::linalg {

namespace {

[[noreturn]] void lapack_fail(const char* routine, lapack_int info) {
    throw std::runtime_error(std::string(routine) + " failed, info=" + std::to_string(info));
}

}  // namespace

Mat matmul(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) kernels::axpy(aik, b.row(k), ci, b.cols());
        }
    }
    return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows(), "matmul_tn: row counts differ");
    Mat c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i)
            if (ak[i] != 0.0) kernels::axpy(ak[i], bk, c.row(i), b.cols());
    }
    return c;
}

Vec gemv_tn(const Mat& a, const Vec& x) {
    require(a.rows() == x.size(), "gemv_tn: dimension mismatch");
    Vec y(a.cols(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k)
        kernels::axpy(x[k], a.row(k), y.data(), a.cols());
    return y;
}

ThinSvd thin_svd(const Mat& a) {
    require(!a.empty(), "thin_svd: empty matrix");
    const auto m = static_cast<lapack_int>(a.rows());
    const auto n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    Mat work = a;  // dgesdd destroys its input
    ThinSvd out;
    out.u = Mat(a.rows(), static_cast<std::size_t>(k));
    out.s = Vec(static_cast<std::size_t>(k));
    out.vt = Mat(static_cast<std::size_t>(k), a.cols());
    const lapack_int info =
        LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', m, n, work.data(), n, out.s.data(), out.u.data(), k,
                       out.vt.data(), n);
    if (info != 0) lapack_fail("dgesdd", info);
    return out;
}

RidgeFactor factor_ridge(const Mat& d, const Mat& z) {
    require(d.rows() == z.rows(), "factor_ridge: row counts differ");
    require(d.rows() >= d.cols(), "factor_ridge: need at least as many rows as columns");
    const auto m = static_cast<lapack_int>(d.rows());
    const auto n = static_cast<lapack_int>(d.cols());

    Mat qr = d;
    std::vector<lapack_int> jpvt(d.cols(), 0);
    Vec tau(d.cols());
    lapack_int info = LAPACKE_dgeqp3(LAPACK_ROW_MAJOR, m, n, qr.data(), n, jpvt.data(), tau.data());
    if (info != 0) lapack_fail("dgeqp3", info);

    Mat qtz = z;
    info = LAPACKE_dormqr(LAPACK_ROW_MAJOR, 'L', 'T', m, static_cast<lapack_int>(z.cols()), n,
                          qr.data(), n, tau.data(), qtz.data(), static_cast<lapack_int>(z.cols()));
    if (info != 0) lapack_fail("dormqr", info);

    RidgeFactor f;
    f.r = Mat(d.cols(), d.cols());
    for (std::size_t i = 0; i < d.cols(); ++i)
        for (std::size_t j = i; j < d.cols(); ++j) f.r(i, j) = qr(i, j);
    f.perm.resize(d.cols());
    for (std::size_t j = 0; j < d.cols(); ++j) f.perm[j] = static_cast<std::size_t>(jpvt[j] - 1);
    f.qtz = Mat(d.cols(), z.cols());
    for (std::size_t i = 0; i < d.cols(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) f.qtz(i, j) = qtz(i, j);
    f.d = d;
    f.z = z;
    return f;
}

RidgeSolution solve_ridge(const RidgeFactor& f, const Vec& gamma) {
    const std::size_t d = f.r.rows();
    const std::size_t k = f.qtz.cols();
    require(gamma.size() == d, "solve_ridge: gamma length mismatch");
    for (double g : gamma) require(g >= 0.0, "solve_ridge: gamma entries must be nonnegative");

    // QR of the stacked [R; diag(sqrt(gamma_perm))] gives R2 with
    // R2^T R2 = R^T R + diag(gamma_perm) = P^T (D^T D + diag(gamma)) P.
    Mat stacked(2 * d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) stacked(i, j) = f.r(i, j);
    for (std::size_t j = 0; j < d; ++j) stacked(d + j, j) = std::sqrt(gamma[f.perm[j]]);

    Vec tau(d);
    lapack_int info = LAPACKE_dgeqrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(2 * d),
                                     static_cast<lapack_int>(d), stacked.data(),
                                     static_cast<lapack_int>(d), tau.data());
    if (info != 0) lapack_fail("dgeqrf", info);

    Mat r2(d, d);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) r2(i, j) = stacked(i, j);
        max_diag = std::max(max_diag, std::abs(r2(i, i)));
    }
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < d; ++i)
        if (std::abs(r2(i, i)) <= 1e-13 * max_diag) bad.push_back(f.perm[i]);
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        std::string what = "regression problem is rank deficient in unregularized columns";
        for (std::size_t c : bad) what += " " + std::to_string(c);
        throw RankDeficiencyError(what, bad);
    }

    // (R2^T R2) v = R^T (Q1^T Z), mu = P v
    Mat rhs(d, k);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += f.r(j, i) * f.qtz(j, c);
            rhs(i, c) = s;
        }

    info = LAPACKE_dtrtrs(LAPACK_ROW_MAJOR, 'U', 'T', 'N', static_cast<lapack_int>(d),
                          static_cast<lapack_int>(k), r2.data(), static_cast<lapack_int>(d),
                          rhs.data(), static_cast<lapack_int>(k));
    if (info != 0) lapack_fail("dtrtrs", info);
    info = LAPACKE_dtrtrs(LAPACK_ROW_MAJOR, 'U', 'N', 'N', static_cast<lapack_int>(d),
                          static_cast<lapack_int>(k), r2.data(), static_cast<lapack_int>(d),
                          rhs.data(), static_cast<lapack_int>(k));
    if (info != 0) lapack_fail("dtrtrs", info);

    RidgeSolution out;
    out.mu = Mat(d, k);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < k; ++c) out.mu(f.perm[j], c) = rhs(j, c);

    // (R2^T R2)^{-1} = R2^{-1} R2^{-T}, then undo the permutation
    Mat rinv = r2;
    info = LAPACKE_dtrtri(LAPACK_ROW_MAJOR, 'U', 'N', static_cast<lapack_int>(d), rinv.data(),
                          static_cast<lapack_int>(d));
    if (info != 0) lapack_fail("dtrtri", info);
    info = LAPACKE_dlauum(LAPACK_ROW_MAJOR, 'U', static_cast<lapack_int>(d), rinv.data(),
                          static_cast<lapack_int>(d));
    if (info != 0) lapack_fail("dlauum", info);
    out.s0 = Mat(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            out.s0(f.perm[i], f.perm[j]) = rinv(i, j);
            out.s0(f.perm[j], f.perm[i]) = rinv(i, j);
        }

    // misfit straight from the stored data matrix; the factored form would
    // also work but this keeps the result independent of pivoting detail
    out.misfit2 = Vec(k, 0.0);
    Vec mu_col(d), pred(f.d.rows());
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) mu_col[j] = out.mu(j, c);
        kernels::gemv_row(f.d.data(), f.d.rows(), d, mu_col.data(), pred.data());
        double s = 0.0;
        for (std::size_t i = 0; i < f.d.rows(); ++i) {
            const double e = pred[i] - f.z(i, c);
            s += e * e;
        }
        for (std::size_t j = 0; j < d; ++j) s += gamma[j] * mu_col[j] * mu_col[j];
        out.misfit2[c] = s;
    }
    return out;
}

bool try_cholesky_lower(const Mat& a, Mat& l) {
    require(a.rows() == a.cols(), "cholesky: matrix must be square");
    l = a;
    const lapack_int info = LAPACKE_dpotrf(LAPACK_ROW_MAJOR, 'L', static_cast<lapack_int>(a.rows()),
                                           l.data(), static_cast<lapack_int>(a.cols()));
    if (info > 0) return false;
    if (info < 0) lapack_fail("dpotrf", info);
    for (std::size_t i = 0; i < l.rows(); ++i)
        for (std::size_t j = i + 1; j < l.cols(); ++j) l(i, j) = 0.0;
    return true;
}

Mat cholesky_lower(const Mat& a) {
    Mat l;
    if (!try_cholesky_lower(a, l)) throw std::runtime_error("cholesky: matrix is not positive definite");
    return l;
}

}  // namespace prom::linalg
