#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "prom/basis.hpp"
#include "prom/opinf.hpp"

// Grid search over the (lambda1, lambda2) regularization pair: candidate
// pairs whose posterior draws integrate stably at every training parameter
// are ranked by the average relative training reconstruction error.

namespace prom {

struct RegGrid {
    Vec lambda1, lambda2;      // candidate values, ascending, positive
    std::size_t n_draws = 20;  // posterior draws checked per pair

    static RegGrid default_grid();  // 1e-10 .. 1e4, two decades apart
};

struct RegPairDiagnostics {
    double lambda1 = 0.0, lambda2 = 0.0;
    std::size_t n_unstable_events = 0;  // unstable (draw, parameter) integrations
    double e_train = 0.0;               // inf when some parameter has no stable draw
    bool all_stable = false;
};

struct RegChoice {
    double lambda1 = 0.0, lambda2 = 0.0;
    double training_error = 0.0;
    bool all_draws_stable = false;
    std::vector<RegPairDiagnostics> diagnostics;
};

// Diagonal of Gamma^2: lambda1 on constant/linear/input columns, lambda2 on
// quadratic columns, shared across the operator rows.
Vec build_regularizer(double lambda1, double lambda2, const StructureFunction& structure);

// Average over (parameter, time) of ||truth - mean||^2 / ||truth||^2 with
// compensated summation; snapshots with negligible norm are skipped.
double training_reconstruction_error(const std::vector<Mat>& truth, const std::vector<Mat>& means);

struct ReducedTrainingSet {
    std::vector<Mat> reduced;  // per parameter, n_t x r
    std::vector<Vec> parameters;
    TimeGrid grid;
};

RegChoice select_regularization(const RegressionData& data, const ReducedTrainingSet& training,
                                std::shared_ptr<const StructureFunction> structure,
                                std::shared_ptr<const PodBasis> basis, const RegGrid& grid,
                                const InstabilityGuard& guard, std::uint64_t seed);

void write_reg_diagnostics_csv(const RegChoice& choice, std::ostream& os);

}  // namespace prom
