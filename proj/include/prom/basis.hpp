#pragma once

#include <vector>

#include "prom/matrix.hpp"
#include "prom/models.hpp"

// POD basis construction from snapshot data, with an optional mean-snapshot
// shift: q ~ qbar + V qhat.

namespace prom {

enum class ShiftMode { Zero, MeanSnapshot };

struct TruncationRule {
    enum class Kind { ResidualEnergyBelow, CumulativeEnergyAbove };
    Kind kind = Kind::ResidualEnergyBelow;
    double tau = 1e-6;

    TruncationRule(Kind k, double t) : kind(k), tau(t) {
        require(t > 0.0 && t < 1.0, "TruncationRule: threshold must lie in (0,1)");
    }
    static TruncationRule residual_energy_below(double tau) {
        return {Kind::ResidualEnergyBelow, tau};
    }
    static TruncationRule cumulative_energy_above(double tau) {
        return {Kind::CumulativeEnergyAbove, tau};
    }
};

struct SnapshotSet {
    std::vector<Vec> parameters;  // n_p parameter vectors
    TimeGrid grid;
    std::vector<Mat> states;  // per parameter: n_t x N, one snapshot per row
    std::vector<Mat> inputs;  // optional, per parameter: n_t x m

    std::size_t n_params() const { return parameters.size(); }
    std::size_t state_dim() const { return states.empty() ? 0 : states.front().cols(); }
    std::size_t total_snapshots() const {
        std::size_t k = 0;
        for (const Mat& s : states) k += s.rows();
        return k;
    }
    void validate() const;
};

struct PodBasis {
    Mat v;                // N x r, orthonormal columns
    Vec shift;            // length N
    Vec singular_values;  // all K values, nonincreasing
    std::size_t r = 0;

    Vec compress(const Vec& q) const;        // V^T (q - shift)
    Vec lift(const Vec& qhat) const;         // shift + V qhat
    Mat compress_rows(const Mat& states) const;
    Mat lift_rows(const Mat& reduced) const;
};

PodBasis compute_pod(const SnapshotSet& snapshots, ShiftMode mode, const TruncationRule& rule);

}  // namespace prom
