#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "prom/matrix.hpp"

// Dense factorizations backed by LAPACK. The ridge path factors the data
// matrix once (pivoted QR) so that many diagonal regularizers can be solved
// against it cheaply.

namespace prom::linalg {

class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& what, std::vector<std::size_t> cols)
        : std::runtime_error(what), columns(std::move(cols)) {}
    std::vector<std::size_t> columns;  // offending columns of the original matrix
};

// C = A B
Mat matmul(const Mat& a, const Mat& b);
// C = A^T B
Mat matmul_tn(const Mat& a, const Mat& b);
// y = A^T x
Vec gemv_tn(const Mat& a, const Vec& x);

// Thin SVD a = U diag(s) V^T; u is (m x k), vt is (k x n), k = min(m, n).
struct ThinSvd {
    Mat u;
    Vec s;
    Mat vt;
};
ThinSvd thin_svd(const Mat& a);

// Pivoted QR of the data matrix plus everything needed to resolve
// min_w ||D w - z_k||^2 + ||diag(sqrt(gamma)) w||^2 for many gamma.
struct RidgeFactor {
    Mat r;                         // d x d upper triangle, D P = Q [R; 0]
    std::vector<std::size_t> perm; // position j in R holds original column perm[j]
    Mat qtz;                       // d x k, Q1^T Z
    Mat d;                         // copy of D, n x d
    Mat z;                         // copy of Z, n x k
};
RidgeFactor factor_ridge(const Mat& d, const Mat& z);

struct RidgeSolution {
    Mat mu;      // d x k solution columns
    Mat s0;      // d x d, (D^T D + diag(gamma))^{-1}
    Vec misfit2; // per column: ||D mu_k - z_k||^2 + sum_j gamma_j mu_k[j]^2
};
// gamma holds the diagonal of the squared regularizer (entries >= 0). Throws
// RankDeficiencyError when unregularized directions are rank deficient.
RidgeSolution solve_ridge(const RidgeFactor& f, const Vec& gamma);

// Lower Cholesky factor of a symmetric positive definite matrix.
// try_ variant returns false instead of throwing when a is not positive definite.
bool try_cholesky_lower(const Mat& a, Mat& l);
Mat cholesky_lower(const Mat& a);

}  // namespace prom::linalg
