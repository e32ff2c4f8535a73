#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prom/basis.hpp"
#include "prom/opinf.hpp"
#include "prom/regsearch.hpp"
#include "prom/rng.hpp"
#include "prom/rom.hpp"

// Adaptive parameter selection: score every candidate by instability
// probability (alpha) and ensemble total variance (omega), then pick the next
// training parameter; per-size discretized Latin hypercube designs are the
// baseline.

namespace prom {

struct AxisSpec {
    std::string name;
    double lo = 0.0, hi = 1.0;
    std::size_t count = 2;
    bool log_spaced = false;

    Vec points() const;
};

class CandidateSet {
public:
    static CandidateSet tensor_grid(const std::vector<AxisSpec>& axes);

    std::size_t size() const { return candidates_.size(); }
    const std::vector<Vec>& candidates() const { return candidates_; }
    const Vec& candidate(std::size_t i) const { return candidates_[i]; }
    const std::vector<AxisSpec>& axes() const { return axes_; }

    bool consumed(std::size_t i) const { return consumed_[i]; }
    void consume(std::size_t i);
    std::vector<std::size_t> unconsumed() const;

private:
    std::vector<AxisSpec> axes_;
    std::vector<Vec> candidates_;
    std::vector<bool> consumed_;
};

struct AcquisitionScore {
    double alpha = 0.0;            // n_unstable / n_draws
    std::optional<double> omega;   // total variance; absent when no draw is stable
};

AcquisitionScore score_from_ensemble(const RomEnsembleSolution& ensemble);

AcquisitionScore score_candidate(const std::vector<RomRealization>& draws, const Vec& xi,
                                 const Vec& qhat0, const TimeGrid& grid,
                                 const InstabilityGuard& guard);

// Selection rule: restrict to the max-alpha set U of unconsumed candidates;
// if that maximum is 1, draw uniformly from U, otherwise take the omega
// argmax over U with ties resolved toward the lowest candidate index.
std::size_t next_sample(const std::vector<std::pair<std::size_t, AcquisitionScore>>& scores,
                        SplitMix64& rng);

// Discrete LHS over the tensor grid: each axis is split into n_p - 1
// index strata, one grid point drawn per stratum, axes paired by random
// permutations; designs colliding with the initial sample are redrawn.
// Returns candidate indices, the initial sample first.
std::vector<std::size_t> lhs_baseline(const CandidateSet& grid, std::size_t n_p,
                                      std::size_t initial_index, SplitMix64& rng);

enum class CampaignMode { Adaptive, Lhs };

struct CampaignConfig {
    std::function<Mat(const Vec&)> solve_fom;  // xi -> n_t x N states on the sample grid
    Vec initial_state;                         // full-order q0, shared across parameters
    std::function<std::shared_ptr<const StructureFunction>(std::size_t)> make_structure;
    ShiftMode shift_mode = ShiftMode::Zero;
    TruncationRule rule = TruncationRule::residual_energy_below(1e-6);
    std::vector<AxisSpec> axes;
    TimeGrid rom_grid;
    std::size_t n_acq_draws = 50;
    RegGrid reg_grid;
    double guard_multiplier = 100.0;
};

inline constexpr std::size_t kNoSelection = static_cast<std::size_t>(-1);

struct IterationRecord {
    std::size_t n_p = 0;  // training-set size this iteration trained on
    std::size_t r = 0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double training_error = 0.0;
    bool reg_all_stable = false;
    std::vector<std::size_t> samples;      // training-set candidate indices
    std::vector<AcquisitionScore> scores;  // one per grid candidate
    double beta = 0.0;                     // fraction of candidates with alpha > 0
    std::size_t chosen = kNoSelection;     // next adaptive sample; kNoSelection otherwise
    std::shared_ptr<const PodBasis> basis;
    std::vector<Mat> mean_reduced;  // per candidate: ensemble mean, empty when never stable
};

struct CampaignRecord {
    CampaignMode mode = CampaignMode::Adaptive;
    std::uint64_t seed = 0;
    // adaptive: acquisition order, initial sample first; lhs: the final design
    std::vector<std::size_t> sample_indices;
    std::vector<IterationRecord> iterations;
};

CampaignRecord run_campaign(const CampaignConfig& config, CampaignMode mode,
                            std::size_t initial_index, std::size_t budget, std::uint64_t seed);

}  // namespace prom
