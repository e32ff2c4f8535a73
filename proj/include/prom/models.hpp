#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "prom/kernels.hpp"
#include "prom/matrix.hpp"

// Full-order models: polynomial systems with affine parameter dependence,
// dq/dt = sum_l theta_c[l](xi) c[l] + sum_l theta_a[l](xi) A[l] q
//       + sum_l theta_h[l](xi) H[l] [q (x) q] + sum_l theta_b[l](xi) B[l] u,
// where [q (x) q] is the duplicate-free Kronecker square of length N(N+1)/2.

namespace prom {

using CoeffFn = std::function<double(const Vec&)>;

// index of the pair (i, j) in the compressed Kronecker square
inline std::size_t compressed_index(std::size_t i, std::size_t j) {
    if (j > i) std::swap(i, j);
    return i * (i + 1) / 2 + j;
}
inline std::size_t compressed_width(std::size_t r) { return r * (r + 1) / 2; }

class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return vals_.size(); }

    void add(std::size_t i, std::size_t j, double v) {
        require(i < rows_ && j < cols_, "SparseMatrix::add: index out of range");
        row_.push_back(i);
        col_.push_back(j);
        vals_.push_back(v);
    }

    // y += scale * A x
    void apply_add(double scale, const double* x, double* y) const {
        for (std::size_t k = 0; k < vals_.size(); ++k)
            y[row_[k]] += scale * vals_[k] * x[col_[k]];
    }

    Mat to_dense() const {
        Mat a(rows_, cols_);
        for (std::size_t k = 0; k < vals_.size(); ++k) a(row_[k], col_[k]) += vals_[k];
        return a;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_, col_;
    std::vector<double> vals_;
};

// Sparse operator on the compressed Kronecker square, held as terms
// y[row] += val * q[j1] * q[j2] so the square itself is never materialized.
class SparseQuadratic {
public:
    struct Term {
        std::size_t row, j1, j2;
        double val;
    };

    SparseQuadratic() = default;
    explicit SparseQuadratic(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }

    void add(std::size_t row, std::size_t j1, std::size_t j2, double v) {
        require(row < dim_ && j1 < dim_ && j2 < dim_, "SparseQuadratic::add: index out of range");
        terms_.push_back({row, j1, j2, v});
    }

    // y += scale * H [q (x) q]
    void apply_add(double scale, const double* q, double* y) const {
        for (const Term& t : terms_) y[t.row] += scale * t.val * q[t.j1] * q[t.j2];
    }

    // dense view as dim x dim(dim+1)/2, for small oracles only
    Mat to_dense() const {
        Mat h(dim_, compressed_width(dim_));
        for (const Term& t : terms_) h(t.row, compressed_index(t.j1, t.j2)) += t.val;
        return h;
    }

private:
    std::size_t dim_ = 0;
    std::vector<Term> terms_;
};

struct PolynomialAffineSystem {
    std::size_t state_dim = 0;
    std::size_t input_dim = 0;
    std::vector<Vec> constant_blocks;
    std::vector<SparseMatrix> linear_blocks;
    std::vector<SparseQuadratic> quadratic_blocks;
    std::vector<Mat> input_blocks;
    std::vector<CoeffFn> theta_constant, theta_linear, theta_quadratic, theta_input;

    void validate() const;

    // out = f(q, u; xi); u may be empty when input_dim == 0
    void rhs(const Vec& xi, const Vec& q, const Vec& u, Vec& out) const;
    Vec rhs(const Vec& xi, const Vec& q) const;
};

struct TimeGrid {
    double t0 = 0.0, tf = 1.0;
    std::size_t n_t = 2;
    std::size_t substeps = 10;  // dt_internal = sample_dt / substeps

    TimeGrid() = default;
    TimeGrid(double t0_, double tf_, std::size_t n_t_, std::size_t substeps_ = 10)
        : t0(t0_), tf(tf_), n_t(n_t_), substeps(substeps_) {
        require(t0 < tf, "TimeGrid: t0 must precede tf");
        require(n_t >= 2, "TimeGrid: need at least two samples");
        require(substeps >= 1, "TimeGrid: substeps must be positive");
    }

    double sample_dt() const { return (tf - t0) / static_cast<double>(n_t - 1); }
    double dt_internal() const { return sample_dt() / static_cast<double>(substeps); }
    double time(std::size_t j) const { return t0 + sample_dt() * static_cast<double>(j); }
};

struct Trajectory {
    TimeGrid grid;
    std::vector<Vec> states;  // sampled states; truncated at the first instability
    bool stable = true;
    std::optional<double> blowup_time;
};

struct InstabilityGuard {
    double bound = 0.0;  // unstable once ||q||_2 exceeds this or q goes non-finite
};

// Fixed-step RK4 over grid.n_t sample times with grid.substeps internal steps
// per sample interval. rhs has signature rhs(t, q, out). Detecting an
// instability is a valid outcome, not an error.
template <typename RhsFn>
Trajectory integrate_rk4(RhsFn&& rhs, const Vec& q0, const TimeGrid& grid,
                         const InstabilityGuard& guard) {
    require(guard.bound > 0.0, "integrate: guard bound must be positive");
    Trajectory traj;
    traj.grid = grid;
    const std::size_t n = q0.size();
    const double dt = grid.dt_internal();
    const double bound2 = guard.bound * guard.bound;
    Vec q = q0, k1(n), k2(n), k3(n), k4(n), tmp(n), next(n);
    const auto bad = [&](const Vec& v) {
        const double s = kernels::nrm2sq(v.data(), n);
        return !std::isfinite(s) || s > bound2;
    };
    if (bad(q)) {
        traj.stable = false;
        traj.blowup_time = grid.t0;
        return traj;
    }
    traj.states.push_back(q);
    for (std::size_t j = 1; j < grid.n_t; ++j) {
        for (std::size_t s = 0; s < grid.substeps; ++s) {
            const double t = grid.time(j - 1) + dt * static_cast<double>(s);
            rhs(t, q, k1);
            kernels::scal_copy(1.0, q.data(), tmp.data(), n);
            kernels::axpy(0.5 * dt, k1.data(), tmp.data(), n);
            rhs(t + 0.5 * dt, tmp, k2);
            kernels::scal_copy(1.0, q.data(), tmp.data(), n);
            kernels::axpy(0.5 * dt, k2.data(), tmp.data(), n);
            rhs(t + 0.5 * dt, tmp, k3);
            kernels::scal_copy(1.0, q.data(), tmp.data(), n);
            kernels::axpy(dt, k3.data(), tmp.data(), n);
            rhs(t + dt, tmp, k4);
            kernels::rk4_combine(q.data(), k1.data(), k2.data(), k3.data(), k4.data(), dt,
                                 next.data(), n);
            q.swap(next);
            if (bad(q)) {
                traj.stable = false;
                traj.blowup_time = t + dt;
                return traj;
            }
        }
        traj.states.push_back(q);
    }
    return traj;
}

Trajectory integrate(const PolynomialAffineSystem& sys, const Vec& xi, const Vec& q0,
                     const TimeGrid& grid, const InstabilityGuard& guard);

// 1D diffusion-reaction q_t = kappa q_xx - rho q^2 on (0, L), q(0)=0, q(L)=1,
// second-order central differences on N uniform points; the state holds the
// N-2 interior values and the boundary data is folded into the constant block.
// xi = (kappa, rho).
PolynomialAffineSystem build_heat_fom(std::size_t n_grid, double length);
Vec build_heat_initial(std::size_t n_grid);

// 2D viscous Burgers on [0, 2]^2 with homogeneous Dirichlet walls, state
// q = [u; v] over the full n_side x n_side grid per field (boundary rows have
// zero dynamics). Backward-difference upwind advection, central diffusion.
// xi = (nu).
PolynomialAffineSystem build_burgers_fom(std::size_t n_side);
Vec build_burgers_initial(std::size_t n_side);

}  // namespace prom
