#pragma once

#include <vector>

#include "prom/matrix.hpp"
#include "prom/models.hpp"
#include "prom/opinf.hpp"

// ROM evaluation: right-hand sides for sampled realizations, ensemble
// integration over posterior draws, and the stable-set statistics that feed
// the acquisition functions.

namespace prom {

struct RomEnsembleSolution {
    std::vector<Trajectory> trajectories;  // reduced, one per draw
    std::vector<std::size_t> stable_set;   // indices of stable draws
    std::size_t n_unstable = 0;
    Mat mean;      // n_t x r over the stable set; empty when no draw is stable
    Mat variance;  // n_t x r, unbiased sample variance (0 when one stable draw)

    bool has_stats() const { return !stable_set.empty(); }
};

Vec rom_rhs(const RomRealization& rom, const Vec& xi, const Vec& qhat, const Vec& u);

Trajectory integrate(const RomRealization& rom, const Vec& xi, const Vec& qhat0,
                     const TimeGrid& grid, const InstabilityGuard& guard);

RomEnsembleSolution solve_ensemble(const std::vector<RomRealization>& draws, const Vec& xi,
                                   const Vec& qhat0, const TimeGrid& grid,
                                   const InstabilityGuard& guard);

// fills stable_set, n_unstable and the stable-set statistics from the
// trajectories already present in the ensemble
void compute_ensemble_statistics(RomEnsembleSolution& ensemble);

// sum over sample times and reduced coordinates of the ensemble variance;
// equals the total variance of the lifted states for any orthonormal basis
double total_variance(const RomEnsembleSolution& ensemble);

}  // namespace prom
