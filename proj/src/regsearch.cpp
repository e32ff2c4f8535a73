#include "prom/regsearch.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "prom/kernels.hpp"
#include "prom/rng.hpp"
#include "prom/rom.hpp"

namespace prom {

namespace {

struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

RegGrid RegGrid::default_grid() {
    RegGrid g;
    for (int e = -10; e <= 4; e += 2) {
        g.lambda1.push_back(std::pow(10.0, e));
        g.lambda2.push_back(std::pow(10.0, e));
    }
    return g;
}

Vec build_regularizer(double lambda1, double lambda2, const StructureFunction& structure) {
    require(lambda1 >= 0.0 && lambda2 >= 0.0, "regularizer: lambdas must be nonnegative");
    Vec gamma2(structure.width());
    for (std::size_t b = 0; b < structure.blocks().size(); ++b) {
        const double lam =
            structure.blocks()[b].kind == BlockKind::Quadratic ? lambda2 : lambda1;
        const std::size_t off = structure.block_offset(b);
        for (std::size_t j = 0; j < structure.block_width(b); ++j) gamma2[off + j] = lam;
    }
    return gamma2;
}

double training_reconstruction_error(const std::vector<Mat>& truth,
                                     const std::vector<Mat>& means) {
    require(truth.size() == means.size() && !truth.empty(),
            "training error: trajectory count mismatch");
    Kahan err;
    std::size_t terms = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Mat& t = truth[i];
        const Mat& m = means[i];
        require(t.rows() == m.rows() && t.cols() == m.cols(), "training error: shape mismatch");
        for (std::size_t j = 0; j < t.rows(); ++j) {
            const double den = kernels::nrm2sq(t.row(j), t.cols());
            if (den < 1e-28) continue;  // snapshot norm below 1e-14
            double num = 0.0;
            for (std::size_t k = 0; k < t.cols(); ++k) {
                const double e = t(j, k) - m(j, k);
                num += e * e;
            }
            err.add(num / den);
            ++terms;
        }
    }
    if (terms == 0) return std::numeric_limits<double>::infinity();
    return err.sum / static_cast<double>(terms);
}

RegChoice select_regularization(const RegressionData& data, const ReducedTrainingSet& training,
                                std::shared_ptr<const StructureFunction> structure,
                                std::shared_ptr<const PodBasis> basis, const RegGrid& grid,
                                const InstabilityGuard& guard, std::uint64_t seed) {
    require(!grid.lambda1.empty() && !grid.lambda2.empty(), "regsearch: empty grid");
    require(!training.parameters.empty(), "regsearch: need at least one training parameter");
    require(training.reduced.size() == training.parameters.size(),
            "regsearch: snapshot/parameter count mismatch");

    const std::size_t n_p = training.parameters.size();
    const PosteriorSolver solver(data);

    RegChoice choice;
    bool have_best = false;
    RegPairDiagnostics best;

    for (std::size_t i1 = 0; i1 < grid.lambda1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < grid.lambda2.size(); ++i2) {
            RegPairDiagnostics diag;
            diag.lambda1 = grid.lambda1[i1];
            diag.lambda2 = grid.lambda2[i2];

            const Vec gamma2 = build_regularizer(diag.lambda1, diag.lambda2, *structure);
            const OperatorPosterior post = solver.solve(gamma2);
            const std::vector<RomRealization> draws =
                sample_operators(post, structure, basis, grid.n_draws, mix_seed(seed, i1, i2));

            std::vector<Mat> means;
            bool mean_defined = true;
            for (std::size_t i = 0; i < n_p; ++i) {
                const Mat& truth = training.reduced[i];
                const RomEnsembleSolution ens = solve_ensemble(
                    draws, training.parameters[i], truth.row_copy(0), training.grid, guard);
                diag.n_unstable_events += ens.n_unstable;
                if (!ens.has_stats()) {
                    mean_defined = false;
                    continue;  // keep counting unstable events for the ranking
                }
                means.push_back(ens.mean);
            }
            diag.all_stable = diag.n_unstable_events == 0;
            diag.e_train = mean_defined
                               ? training_reconstruction_error(training.reduced, means)
                               : std::numeric_limits<double>::infinity();

            // stable pairs rank strictly above unstable ones; among stable
            // pairs the training error decides; with nothing stable, fewest
            // unstable events wins, then smaller error, then larger lambdas
            bool better;
            if (!have_best)
                better = true;
            else if (diag.all_stable != best.all_stable)
                better = diag.all_stable;
            else if (diag.all_stable)
                better = diag.e_train < best.e_train;
            else if (diag.n_unstable_events != best.n_unstable_events)
                better = diag.n_unstable_events < best.n_unstable_events;
            else if (diag.e_train != best.e_train)
                better = diag.e_train < best.e_train;
            else if (diag.lambda2 != best.lambda2)
                better = diag.lambda2 > best.lambda2;
            else
                better = diag.lambda1 > best.lambda1;
            if (better) {
                best = diag;
                have_best = true;
            }
            choice.diagnostics.push_back(diag);
        }

    choice.lambda1 = best.lambda1;
    choice.lambda2 = best.lambda2;
    choice.training_error = best.e_train;
    choice.all_draws_stable = best.all_stable;
    return choice;
}

void write_reg_diagnostics_csv(const RegChoice& choice, std::ostream& os) {
    os << "lambda1,lambda2,n_unstable_events,e_train\n";
    char buf[128];
    for (const RegPairDiagnostics& d : choice.diagnostics) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g\n", d.lambda1, d.lambda2,
                      d.n_unstable_events, d.e_train);
        os << buf;
    }
}

}  // namespace prom
