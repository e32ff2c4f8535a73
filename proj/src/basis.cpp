#include "prom/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "prom/kernels.hpp"
#include "prom/linalg.hpp"

namespace prom {

void SnapshotSet::validate() const {
    require(!parameters.empty(), "snapshots: need at least one parameter");
    require(states.size() == parameters.size(), "snapshots: states/parameters count mismatch");
    require(inputs.empty() || inputs.size() == parameters.size(),
            "snapshots: inputs/parameters count mismatch");
    const std::size_t n = states.front().cols();
    for (const Mat& s : states) {
        require(s.cols() == n, "snapshots: inconsistent state dimension");
        require(s.rows() == grid.n_t, "snapshots: trajectory length differs from grid");
    }
}

Vec PodBasis::compress(const Vec& q) const {
    require(q.size() == v.rows(), "compress: state dimension mismatch");
    Vec qhat(r, 0.0);
    for (std::size_t i = 0; i < v.rows(); ++i)
        kernels::axpy(q[i] - shift[i], v.row(i), qhat.data(), r);
    return qhat;
}

Vec PodBasis::lift(const Vec& qhat) const {
    require(qhat.size() == r, "lift: reduced dimension mismatch");
    Vec q(v.rows());
    kernels::gemv_row(v.data(), v.rows(), r, qhat.data(), q.data());
    kernels::axpy(1.0, shift.data(), q.data(), q.size());
    return q;
}

Mat PodBasis::compress_rows(const Mat& states) const {
    require(states.cols() == v.rows(), "compress: state dimension mismatch");
    Mat reduced(states.rows(), r);
    for (std::size_t j = 0; j < states.rows(); ++j) {
        const double* row = states.row(j);
        double* out = reduced.row(j);
        for (std::size_t i = 0; i < v.rows(); ++i)
            kernels::axpy(row[i] - shift[i], v.row(i), out, r);
    }
    return reduced;
}

Mat PodBasis::lift_rows(const Mat& reduced) const {
    require(reduced.cols() == r, "lift: reduced dimension mismatch");
    Mat states(reduced.rows(), v.rows());
    for (std::size_t j = 0; j < reduced.rows(); ++j) {
        kernels::gemv_row(v.data(), v.rows(), r, reduced.row(j), states.row(j));
        kernels::axpy(1.0, shift.data(), states.row(j), v.rows());
    }
    return states;
}

PodBasis compute_pod(const SnapshotSet& snapshots, ShiftMode mode, const TruncationRule& rule) {
    snapshots.validate();
    const std::size_t n = snapshots.state_dim();
    const std::size_t k_total = snapshots.total_snapshots();

    // stack all snapshots as rows: S = Q^T with Q the usual N x K snapshot matrix
    Mat s(k_total, n);
    std::size_t row = 0;
    for (const Mat& block : snapshots.states)
        for (std::size_t j = 0; j < block.rows(); ++j) s.set_row(row++, block.row_copy(j));

    Vec shift(n, 0.0);
    if (mode == ShiftMode::MeanSnapshot) {
        for (std::size_t i = 0; i < k_total; ++i)
            kernels::axpy(1.0, s.row(i), shift.data(), n);
        for (double& x : shift) x /= static_cast<double>(k_total);
    }
    for (std::size_t i = 0; i < k_total; ++i) kernels::axpy(-1.0, shift.data(), s.row(i), n);

    double frob2 = 0.0;
    for (std::size_t i = 0; i < k_total; ++i) frob2 += kernels::nrm2sq(s.row(i), n);
    if (frob2 == 0.0) throw std::runtime_error("pod: shifted snapshot matrix is identically zero");

    // S = U diag(sv) Vt, so the left singular vectors of Q are the rows of Vt
    linalg::ThinSvd svd = linalg::thin_svd(s);
    const std::size_t k = svd.s.size();

    double total = 0.0;
    for (double sv : svd.s) total += sv * sv;
    std::size_t r = k;
    double cum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        cum += svd.s[i] * svd.s[i];
        const bool ok = rule.kind == TruncationRule::Kind::ResidualEnergyBelow
                            ? (total - cum) / total < rule.tau
                            : cum / total > rule.tau;
        if (ok) {
            r = i + 1;
            break;
        }
    }

    PodBasis basis;
    basis.shift = std::move(shift);
    basis.singular_values = svd.s;
    basis.r = r;
    basis.v = Mat(n, r);
    for (std::size_t j = 0; j < r; ++j) {
        // sign convention: largest-magnitude entry of each basis vector is positive
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(svd.vt(j, i)) > std::abs(svd.vt(j, arg))) arg = i;
        const double sgn = svd.vt(j, arg) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) basis.v(i, j) = sgn * svd.vt(j, i);
    }
    return basis;
}

}  // namespace prom
