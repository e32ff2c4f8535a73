#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "prom/basis.hpp"
#include "prom/linalg.hpp"
#include "prom/matrix.hpp"
#include "prom/models.hpp"

// Affine-parametric operator inference: the reduced model is
// dqhat/dt = Ohat d(qhat, u; xi), with d assembled blockwise from the
// structure below and Ohat learned row-by-row via Bayesian ridge regression.

namespace prom {

enum class BlockKind { Constant, Linear, Quadratic, Input };

struct StructureBlock {
    BlockKind kind;
    CoeffFn theta;
    std::string label;
};

class StructureFunction {
public:
    StructureFunction(std::size_t r, std::size_t m, std::vector<StructureBlock> blocks);

    std::size_t r() const { return r_; }
    std::size_t m() const { return m_; }
    std::size_t width() const { return width_; }  // d(r, m)
    const std::vector<StructureBlock>& blocks() const { return blocks_; }
    std::size_t block_width(std::size_t i) const;
    std::size_t block_offset(std::size_t i) const { return offsets_[i]; }

    // out must hold width() entries
    void evaluate(const Vec& qhat, const Vec& u, const Vec& xi, double* out) const;
    Vec evaluate(const Vec& qhat, const Vec& u, const Vec& xi) const;

    // per-block coefficient values, so a fixed xi is not re-evaluated in hot loops
    Vec weights(const Vec& xi) const;
    void evaluate_weighted(const Vec& qhat, const Vec& u, const Vec& w, double* out) const;

private:
    std::size_t r_ = 0, m_ = 0, width_ = 0;
    std::vector<StructureBlock> blocks_;
    std::vector<std::size_t> offsets_;
};

struct RegressionData {
    Mat d;  // (n_p * n_t) x d(r, m), rows parameter-major then time
    Mat z;  // (n_p * n_t) x r, column k holds the targets z_k
    std::vector<std::pair<std::size_t, std::size_t>> provenance;  // (param, time) per row
};

// 2nd-order finite differences in time: central inside, one-sided at the ends.
Mat estimate_time_derivatives(const Mat& reduced, const TimeGrid& grid);

RegressionData assemble_data_matrix(const std::vector<Mat>& reduced,
                                    const std::vector<Mat>& inputs,
                                    const std::vector<Vec>& parameters, const TimeGrid& grid,
                                    const StructureFunction& structure);

struct OperatorPosterior {
    Mat mean;    // r x d, row k = mu_k
    Mat s0;      // d x d, (D^T D + Gamma^2)^{-1}; Sigma_k = sigma2[k] * s0
    Vec sigma2;  // per-row noise variance
    Vec gamma2;  // diagonal of Gamma^2
    std::size_t n_rows = 0;  // regression rows behind the sigma2 estimate

    Mat covariance(std::size_t k) const;
};

// Factors D once so many regularizers can be solved against the same data.
class PosteriorSolver {
public:
    explicit PosteriorSolver(const RegressionData& data);
    OperatorPosterior solve(const Vec& gamma2) const;

private:
    linalg::RidgeFactor factor_;
    std::size_t n_rows_ = 0, r_ = 0;
};

OperatorPosterior solve_posterior(const RegressionData& data, const Vec& gamma2);

struct RomRealization {
    Mat op;  // r x d(r, m)
    std::shared_ptr<const StructureFunction> structure;
    std::shared_ptr<const PodBasis> basis;
};

// n_d independent draws of the operator matrix, rows sampled from
// N(mu_k, Sigma_k). Deterministic given seed; draw l only touches the RNG
// stream derived from (seed, l).
std::vector<RomRealization> sample_operators(const OperatorPosterior& posterior,
                                             std::shared_ptr<const StructureFunction> structure,
                                             std::shared_ptr<const PodBasis> basis, std::size_t n_d,
                                             std::uint64_t seed);

}  // namespace prom
