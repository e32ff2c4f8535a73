#include "prom/active.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "prom/kernels.hpp"

namespace prom {

Vec AxisSpec::points() const {
    require(count >= 1, "axis: need at least one point");
    require(lo < hi || count == 1, "axis: lo must precede hi");
    require(!log_spaced || lo > 0.0, "axis: log spacing needs positive bounds");
    Vec pts(count);
    if (count == 1) {
        pts[0] = lo;
        return pts;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        pts[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    return pts;
}

CandidateSet CandidateSet::tensor_grid(const std::vector<AxisSpec>& axes) {
    require(!axes.empty(), "candidates: need at least one axis");
    CandidateSet set;
    set.axes_ = axes;
    std::vector<Vec> pts;
    std::size_t total = 1;
    for (const AxisSpec& ax : axes) {
        pts.push_back(ax.points());
        total *= pts.back().size();
    }
    set.candidates_.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec xi(axes.size());
        for (std::size_t a = 0; a < axes.size(); ++a) xi[a] = pts[a][idx[a]];
        set.candidates_.push_back(std::move(xi));
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < pts[a].size()) break;
            idx[a] = 0;
        }
    }
    set.consumed_.assign(total, false);
    return set;
}

void CandidateSet::consume(std::size_t i) {
    require(i < candidates_.size(), "candidates: index out of range");
    require(!consumed_[i], "candidates: already consumed");
    consumed_[i] = true;
}

std::vector<std::size_t> CandidateSet::unconsumed() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < candidates_.size(); ++i)
        if (!consumed_[i]) out.push_back(i);
    return out;
}

AcquisitionScore score_from_ensemble(const RomEnsembleSolution& ensemble) {
    AcquisitionScore score;
    const std::size_t n_d = ensemble.trajectories.size();
    score.alpha = static_cast<double>(ensemble.n_unstable) / static_cast<double>(n_d);
    if (ensemble.has_stats()) score.omega = total_variance(ensemble);
    return score;
}

AcquisitionScore score_candidate(const std::vector<RomRealization>& draws, const Vec& xi,
                                 const Vec& qhat0, const TimeGrid& grid,
                                 const InstabilityGuard& guard) {
    return score_from_ensemble(solve_ensemble(draws, xi, qhat0, grid, guard));
}

std::size_t next_sample(const std::vector<std::pair<std::size_t, AcquisitionScore>>& scores,
                        SplitMix64& rng) {
    require(!scores.empty(), "next_sample: no scored candidates");
    double max_alpha = scores.front().second.alpha;
    for (const auto& [idx, sc] : scores) max_alpha = std::max(max_alpha, sc.alpha);
    std::vector<std::size_t> tied;  // positions into scores
    for (std::size_t p = 0; p < scores.size(); ++p)
        if (scores[p].second.alpha == max_alpha) tied.push_back(p);

    if (max_alpha == 1.0) return scores[tied[rng.next_index(tied.size())]].first;

    std::size_t best = tied.front();
    for (std::size_t p : tied) {
        const double w = scores[p].second.omega.value();
        const double wb = scores[best].second.omega.value();
        if (w > wb || (w == wb && scores[p].first < scores[best].first)) best = p;
    }
    return scores[best].first;
}

namespace {

std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i-- > 1;) std::swap(p[i], p[rng.next_index(i + 1)]);
    return p;
}

}  // namespace

std::vector<std::size_t> lhs_baseline(const CandidateSet& grid, std::size_t n_p,
                                      std::size_t initial_index, SplitMix64& rng) {
    require(n_p >= 1, "lhs: need at least one sample");
    require(initial_index < grid.size(), "lhs: initial index out of range");
    if (n_p > grid.size()) throw std::invalid_argument("lhs: budget exceeds the candidate grid");

    std::vector<std::size_t> design{initial_index};
    if (n_p == 1) return design;
    if (n_p == grid.size()) {  // saturated: every candidate exactly once
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (i != initial_index) design.push_back(i);
        return design;
    }

    const std::size_t n_axes = grid.axes().size();
    std::vector<std::size_t> sizes(n_axes), strides(n_axes);
    for (std::size_t a = 0; a < n_axes; ++a) sizes[a] = grid.axes()[a].count;
    strides[n_axes - 1] = 1;
    for (std::size_t a = n_axes - 1; a-- > 0;) strides[a] = strides[a + 1] * sizes[a + 1];

    const std::size_t n_add = n_p - 1;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::vector<std::size_t>> axis_idx(n_axes);
        for (std::size_t a = 0; a < n_axes; ++a) {
            axis_idx[a].resize(n_add);
            if (n_add <= sizes[a]) {
                const std::vector<std::size_t> perm = permutation(n_add, rng);
                for (std::size_t k = 0; k < n_add; ++k) {
                    const std::size_t s = perm[k];
                    const std::size_t lo = s * sizes[a] / n_add;
                    const std::size_t hi = (s + 1) * sizes[a] / n_add;
                    axis_idx[a][k] = lo + rng.next_index(hi - lo);
                }
            } else {
                for (std::size_t k = 0; k < n_add; ++k)
                    axis_idx[a][k] = rng.next_index(sizes[a]);
            }
        }
        std::vector<std::size_t> flats(n_add);
        for (std::size_t k = 0; k < n_add; ++k) {
            std::size_t f = 0;
            for (std::size_t a = 0; a < n_axes; ++a) f += axis_idx[a][k] * strides[a];
            flats[k] = f;
        }
        std::vector<std::size_t> sorted = flats;
        sorted.push_back(initial_index);
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        design.insert(design.end(), flats.begin(), flats.end());
        return design;
    }

    // last resort: fill with the lowest-index unused candidates
    for (std::size_t i = 0; i < grid.size() && design.size() < n_p; ++i)
        if (i != initial_index) design.push_back(i);
    return design;
}

CampaignRecord run_campaign(const CampaignConfig& config, CampaignMode mode,
                            std::size_t initial_index, std::size_t budget, std::uint64_t seed) {
    require(budget >= 1, "campaign: budget must be at least 1");
    require(static_cast<bool>(config.solve_fom), "campaign: missing FOM solver");
    require(static_cast<bool>(config.make_structure), "campaign: missing structure factory");

    CandidateSet grid = CandidateSet::tensor_grid(config.axes);
    require(initial_index < grid.size(), "campaign: initial index out of range");
    require(budget <= grid.size(), "campaign: budget exceeds the candidate grid");

    CampaignRecord record;
    record.mode = mode;
    record.seed = seed;

    SplitMix64 lhs_rng(mix_seed(seed, 4));
    SplitMix64 tie_rng(mix_seed(seed, 3));

    std::vector<std::size_t> current{initial_index};
    grid.consume(initial_index);

    std::map<std::size_t, Mat> fom_states;  // per candidate index, n_t x N
    for (std::size_t n_p = 1; n_p <= budget; ++n_p) {
        // the baseline redraws a fresh design at every size; the adaptive arm
        // grows its training set one acquisition at a time
        if (mode == CampaignMode::Lhs && n_p > 1)
            current = lhs_baseline(grid, n_p, initial_index, lhs_rng);

        IterationRecord rec;
        rec.n_p = n_p;
        rec.samples = current;

        SnapshotSet snaps;
        snaps.grid = config.rom_grid;
        for (const std::size_t index : current) {
            snaps.parameters.push_back(grid.candidate(index));
            auto it = fom_states.find(index);
            if (it == fom_states.end())
                it = fom_states.emplace(index, config.solve_fom(grid.candidate(index))).first;
            snaps.states.push_back(it->second);
        }
        auto basis = std::make_shared<const PodBasis>(
            compute_pod(snaps, config.shift_mode, config.rule));
        rec.r = basis->r;
        rec.basis = basis;

        ReducedTrainingSet training;
        training.parameters = snaps.parameters;
        training.grid = config.rom_grid;
        double max_norm2 = 0.0;
        for (const Mat& states : snaps.states) {
            training.reduced.push_back(basis->compress_rows(states));
            const Mat& red = training.reduced.back();
            for (std::size_t j = 0; j < red.rows(); ++j)
                max_norm2 = std::max(max_norm2, kernels::nrm2sq(red.row(j), red.cols()));
        }
        const InstabilityGuard guard{config.guard_multiplier * std::sqrt(max_norm2)};

        auto structure = config.make_structure(basis->r);
        const RegressionData data = assemble_data_matrix(training.reduced, {}, training.parameters,
                                                         config.rom_grid, *structure);
        const RegChoice reg =
            select_regularization(data, training, structure, basis, config.reg_grid, guard,
                                  mix_seed(seed, 1, n_p - 1));
        rec.lambda1 = reg.lambda1;
        rec.lambda2 = reg.lambda2;
        rec.training_error = reg.training_error;
        rec.reg_all_stable = reg.all_draws_stable;

        const OperatorPosterior posterior =
            solve_posterior(data, build_regularizer(reg.lambda1, reg.lambda2, *structure));
        const std::vector<RomRealization> draws = sample_operators(
            posterior, structure, basis, config.n_acq_draws, mix_seed(seed, 2, n_p - 1));

        const Vec qhat0 = basis->compress(config.initial_state);
        rec.scores.resize(grid.size());
        rec.mean_reduced.resize(grid.size());
        std::size_t n_flagged = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const RomEnsembleSolution ens =
                solve_ensemble(draws, grid.candidate(i), qhat0, config.rom_grid, guard);
            rec.scores[i] = score_from_ensemble(ens);
            if (ens.has_stats()) rec.mean_reduced[i] = ens.mean;
            if (rec.scores[i].alpha > 0.0) ++n_flagged;
        }
        rec.beta = static_cast<double>(n_flagged) / static_cast<double>(grid.size());

        if (mode == CampaignMode::Adaptive && n_p < budget) {
            std::vector<std::pair<std::size_t, AcquisitionScore>> open;
            for (std::size_t i : grid.unconsumed()) open.emplace_back(i, rec.scores[i]);
            const std::size_t chosen = next_sample(open, tie_rng);
            rec.chosen = chosen;
            grid.consume(chosen);
            current.push_back(chosen);
        }
        record.iterations.push_back(std::move(rec));
    }
    record.sample_indices = current;
    return record;
}

}  // namespace prom
