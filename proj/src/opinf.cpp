#include "prom/opinf.hpp"

#include <cmath>
#include <stdexcept>

#include "prom/kernels.hpp"
#include "prom/rng.hpp"

namespace prom {

StructureFunction::StructureFunction(std::size_t r, std::size_t m,
                                     std::vector<StructureBlock> blocks)
    : r_(r), m_(m), blocks_(std::move(blocks)) {
    require(r_ > 0, "structure: reduced dimension must be positive");
    require(!blocks_.empty(), "structure: need at least one block");
    offsets_.reserve(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        offsets_.push_back(width_);
        width_ += block_width(i);
    }
    require(width_ > 0, "structure: zero total width");
}

std::size_t StructureFunction::block_width(std::size_t i) const {
    switch (blocks_[i].kind) {
        case BlockKind::Constant:
            return 1;
        case BlockKind::Linear:
            return r_;
        case BlockKind::Quadratic:
            return compressed_width(r_);
        case BlockKind::Input:
            return m_;
    }
    throw std::logic_error("structure: unknown block kind");
}

Vec StructureFunction::weights(const Vec& xi) const {
    Vec w(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) w[i] = blocks_[i].theta(xi);
    return w;
}

void StructureFunction::evaluate(const Vec& qhat, const Vec& u, const Vec& xi,
                                 double* out) const {
    evaluate_weighted(qhat, u, weights(xi), out);
}

void StructureFunction::evaluate_weighted(const Vec& qhat, const Vec& u, const Vec& wts,
                                          double* out) const {
    require(qhat.size() == r_, "structure: reduced state dimension mismatch");
    require(wts.size() == blocks_.size(), "structure: weight count mismatch");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const double w = wts[i];
        double* dst = out + offsets_[i];
        switch (blocks_[i].kind) {
            case BlockKind::Constant:
                dst[0] = w;
                break;
            case BlockKind::Linear:
                kernels::scal_copy(w, qhat.data(), dst, r_);
                break;
            case BlockKind::Quadratic:
                kernels::compressed_square(qhat.data(), r_, w, dst);
                break;
            case BlockKind::Input:
                require(u.size() == m_, "structure: input dimension mismatch");
                kernels::scal_copy(w, u.data(), dst, m_);
                break;
        }
    }
}

Vec StructureFunction::evaluate(const Vec& qhat, const Vec& u, const Vec& xi) const {
    Vec out(width_);
    evaluate(qhat, u, xi, out.data());
    return out;
}

Mat estimate_time_derivatives(const Mat& reduced, const TimeGrid& grid) {
    const std::size_t n_t = reduced.rows();
    const std::size_t r = reduced.cols();
    if (n_t < 3) throw std::invalid_argument("derivatives: need at least 3 samples");
    require(n_t == grid.n_t, "derivatives: snapshot count differs from grid");
    const double dt = grid.sample_dt();
    Mat qdot(n_t, r);
    for (std::size_t k = 0; k < r; ++k) {
        qdot(0, k) = (-3.0 * reduced(0, k) + 4.0 * reduced(1, k) - reduced(2, k)) / (2.0 * dt);
        for (std::size_t j = 1; j + 1 < n_t; ++j)
            qdot(j, k) = (reduced(j + 1, k) - reduced(j - 1, k)) / (2.0 * dt);
        qdot(n_t - 1, k) = (3.0 * reduced(n_t - 1, k) - 4.0 * reduced(n_t - 2, k) +
                            reduced(n_t - 3, k)) /
                           (2.0 * dt);
    }
    return qdot;
}

RegressionData assemble_data_matrix(const std::vector<Mat>& reduced,
                                    const std::vector<Mat>& inputs,
                                    const std::vector<Vec>& parameters, const TimeGrid& grid,
                                    const StructureFunction& structure) {
    require(!parameters.empty(), "assemble: need at least one parameter");
    require(reduced.size() == parameters.size(), "assemble: snapshot/parameter count mismatch");
    require(inputs.empty() || inputs.size() == parameters.size(),
            "assemble: input/parameter count mismatch");
    const std::size_t n_p = parameters.size();
    const std::size_t n_t = grid.n_t;
    const std::size_t r = structure.r();

    RegressionData data;
    data.d = Mat(n_p * n_t, structure.width());
    data.z = Mat(n_p * n_t, r);
    data.provenance.reserve(n_p * n_t);

    Vec u_row;
    for (std::size_t i = 0; i < n_p; ++i) {
        require(reduced[i].rows() == n_t, "assemble: trajectory length differs from grid");
        require(reduced[i].cols() == r, "assemble: reduced dimension mismatch");
        const Mat qdot = estimate_time_derivatives(reduced[i], grid);
        for (std::size_t j = 0; j < n_t; ++j) {
            const std::size_t row = i * n_t + j;
            if (!inputs.empty()) u_row = inputs[i].row_copy(j);
            structure.evaluate(reduced[i].row_copy(j), u_row, parameters[i], data.d.row(row));
            for (std::size_t k = 0; k < r; ++k) data.z(row, k) = qdot(j, k);
            data.provenance.emplace_back(i, j);
        }
    }
    return data;
}

Mat OperatorPosterior::covariance(std::size_t k) const {
    Mat c = s0;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= sigma2[k];
    return c;
}

PosteriorSolver::PosteriorSolver(const RegressionData& data)
    : factor_(linalg::factor_ridge(data.d, data.z)),
      n_rows_(data.d.rows()),
      r_(data.z.cols()) {}

OperatorPosterior PosteriorSolver::solve(const Vec& gamma2) const {
    const linalg::RidgeSolution sol = linalg::solve_ridge(factor_, gamma2);
    OperatorPosterior post;
    post.mean = sol.mu.transposed();
    post.s0 = sol.s0;
    post.gamma2 = gamma2;
    post.n_rows = n_rows_;
    post.sigma2 = Vec(r_);
    for (std::size_t k = 0; k < r_; ++k)
        post.sigma2[k] = sol.misfit2[k] / static_cast<double>(n_rows_);
    return post;
}

OperatorPosterior solve_posterior(const RegressionData& data, const Vec& gamma2) {
    return PosteriorSolver(data).solve(gamma2);
}

std::vector<RomRealization> sample_operators(const OperatorPosterior& posterior,
                                             std::shared_ptr<const StructureFunction> structure,
                                             std::shared_ptr<const PodBasis> basis, std::size_t n_d,
                                             std::uint64_t seed) {
    require(n_d >= 1, "sample: need at least one draw");
    const std::size_t r = posterior.mean.rows();
    const std::size_t d = posterior.mean.cols();

    // Sigma_k = sigma2[k] * s0, so one jittered factor of s0 serves every row:
    // chol(Sigma_k + sigma2[k] jit I) = sigma_k chol(s0 + jit I)
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += posterior.s0(i, i);
    double jitter = 1e-14 * trace / static_cast<double>(d);
    Mat l0;
    bool ok = false;
    for (int attempt = 0; attempt < 6 && !ok; ++attempt, jitter *= 10.0) {
        Mat shifted = posterior.s0;
        for (std::size_t i = 0; i < d; ++i) shifted(i, i) += jitter;
        ok = linalg::try_cholesky_lower(shifted, l0);
    }
    if (!ok) throw std::runtime_error("sample: covariance is numerically degenerate");

    std::vector<RomRealization> draws;
    draws.reserve(n_d);
    Vec zstd(d), corr(d);
    for (std::size_t l = 0; l < n_d; ++l) {
        NormalStream g(mix_seed(seed, l));
        RomRealization real;
        real.op = posterior.mean;
        real.structure = structure;
        real.basis = basis;
        for (std::size_t k = 0; k < r; ++k) {
            const double sigma = std::sqrt(posterior.sigma2[k]);
            for (std::size_t j = 0; j < d; ++j) zstd[j] = g.next();
            kernels::gemv_row(l0.data(), d, d, zstd.data(), corr.data());
            kernels::axpy(sigma, corr.data(), real.op.row(k), d);
        }
        draws.push_back(std::move(real));
    }
    return draws;
}

}  // namespace prom
