#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "prom/active.hpp"

using namespace prom;

namespace {

Trajectory constant_trajectory(double value, std::size_t n_t, std::size_t r) {
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 1.0, n_t, 1};
    traj.states.assign(n_t, Vec(r, value));
    return traj;
}

Trajectory unstable_trajectory(std::size_t r) {
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 1.0, 3, 1};
    traj.states.assign(1, Vec(r, 1.0));
    traj.stable = false;
    traj.blowup_time = 0.3;
    return traj;
}

AcquisitionScore score_of(const std::vector<Trajectory>& trajectories) {
    RomEnsembleSolution ens;
    ens.trajectories = trajectories;
    compute_ensemble_statistics(ens);
    return score_from_ensemble(ens);
}

std::shared_ptr<const StructureFunction> linear_structure(std::size_t r) {
    std::vector<StructureBlock> blocks;
    blocks.push_back({BlockKind::Linear, [](const Vec&) { return 1.0; }, "A"});
    return std::make_shared<StructureFunction>(r, 0, std::move(blocks));
}

}  // namespace

TEST_CASE("axis points honor linear and log spacing") {
    const AxisSpec lin{"a", 0.0, 1.0, 5, false};
    const Vec lp = lin.points();
    REQUIRE(lp.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(lp[i] == doctest::Approx(0.25 * static_cast<double>(i)).epsilon(1e-15).scale(1.0));

    const AxisSpec lg{"b", 1e-3, 1e-1, 3, true};
    const Vec gp = lg.points();
    REQUIRE(gp.size() == 3);
    CHECK(gp[0] == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(gp[1] == doctest::Approx(1e-2).epsilon(1e-14));
    CHECK(gp[2] == doctest::Approx(1e-1).epsilon(1e-14));

    const AxisSpec single{"c", 7.0, 7.0, 1, false};
    REQUIRE(single.points().size() == 1);
    CHECK(single.points()[0] == 7.0);
    CHECK_THROWS(AxisSpec{"d", -1.0, 1.0, 3, true}.points());
}

TEST_CASE("tensor grid enumerates the last axis fastest") {
    const std::vector<AxisSpec> axes = {{"a", 0.0, 1.0, 2, false}, {"b", 10.0, 30.0, 3, false}};
    const CandidateSet grid = CandidateSet::tensor_grid(axes);
    REQUIRE(grid.size() == 6);
    const double a_pts[2] = {0.0, 1.0};
    const double b_pts[3] = {10.0, 20.0, 30.0};
    for (std::size_t i0 = 0; i0 < 2; ++i0)
        for (std::size_t i1 = 0; i1 < 3; ++i1) {
            const Vec& xi = grid.candidate(i0 * 3 + i1);
            CHECK(xi[0] == doctest::Approx(a_pts[i0]).epsilon(1e-15).scale(1.0));
            CHECK(xi[1] == doctest::Approx(b_pts[i1]).epsilon(1e-15).scale(1.0));
        }
    std::set<std::pair<double, double>> uniq;
    for (const Vec& xi : grid.candidates()) uniq.emplace(xi[0], xi[1]);
    CHECK(uniq.size() == 6);
}

TEST_CASE("consumption bookkeeping") {
    CandidateSet grid = CandidateSet::tensor_grid({{"a", 0.0, 1.0, 4, false}});
    CHECK(grid.unconsumed().size() == 4);
    grid.consume(2);
    CHECK(grid.consumed(2));
    CHECK(!grid.consumed(0));
    const auto open = grid.unconsumed();
    REQUIRE(open.size() == 3);
    CHECK(std::find(open.begin(), open.end(), 2) == open.end());
    CHECK_THROWS(grid.consume(2));
    CHECK_THROWS(grid.consume(9));
}

TEST_CASE("scores for stable, unstable and mixed ensembles") {
    // identical stable draws: no instability, no spread
    const AcquisitionScore same = score_of({constant_trajectory(1.5, 4, 2),
                                            constant_trajectory(1.5, 4, 2),
                                            constant_trajectory(1.5, 4, 2)});
    CHECK(same.alpha == 0.0);
    REQUIRE(same.omega.has_value());
    CHECK(*same.omega == 0.0);

    // all unstable: alpha one, omega absent
    const AcquisitionScore bad = score_of({unstable_trajectory(2), unstable_trajectory(2)});
    CHECK(bad.alpha == 1.0);
    CHECK(!bad.omega.has_value());

    // three constant draws: omega = n_t * r * var({c1, c2, c3})
    const double c1 = 1.0, c2 = 2.0, c3 = 4.0;
    const AcquisitionScore spread = score_of({constant_trajectory(c1, 4, 2),
                                              constant_trajectory(c2, 4, 2),
                                              constant_trajectory(c3, 4, 2)});
    const double mean = (c1 + c2 + c3) / 3.0;
    const double var = ((c1 - mean) * (c1 - mean) + (c2 - mean) * (c2 - mean) +
                        (c3 - mean) * (c3 - mean)) /
                       2.0;
    CHECK(spread.alpha == 0.0);
    REQUIRE(spread.omega.has_value());
    CHECK(*spread.omega == doctest::Approx(4.0 * 2.0 * var).epsilon(1e-13));

    // mixed: alpha counts the unstable fraction, omega covers the stable part
    const AcquisitionScore mixed = score_of({constant_trajectory(c1, 4, 2),
                                             unstable_trajectory(2),
                                             constant_trajectory(c2, 4, 2),
                                             unstable_trajectory(2)});
    CHECK(mixed.alpha == 0.5);
    REQUIRE(mixed.omega.has_value());
    const double var2 = (c2 - c1) * (c2 - c1) / 2.0;
    CHECK(*mixed.omega == doctest::Approx(4.0 * 2.0 * var2).epsilon(1e-13));
}

TEST_CASE("omega is present exactly when some draw is stable") {
    SplitMix64 rng(81);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<Trajectory> trajs;
        const std::size_t n_d = 1 + rng.next_index(6);
        std::size_t n_unstable = 0;
        for (std::size_t l = 0; l < n_d; ++l) {
            if (rng.next_unit() < 0.4) {
                trajs.push_back(unstable_trajectory(2));
                ++n_unstable;
            } else {
                trajs.push_back(constant_trajectory(rng.next_unit(), 3, 2));
            }
        }
        const AcquisitionScore score = score_of(trajs);
        CHECK(score.alpha ==
              static_cast<double>(n_unstable) / static_cast<double>(n_d));
        CHECK(score.omega.has_value() == (n_unstable < n_d));
        CHECK((score.alpha < 1.0) == score.omega.has_value());
    }
}

TEST_CASE("omega scales quadratically with the trajectory amplitude") {
    SplitMix64 rng(82);
    std::vector<Trajectory> base, scaled;
    const double s = 3.0;
    for (int l = 0; l < 5; ++l) {
        Trajectory traj;
        traj.grid = TimeGrid{0.0, 1.0, 6, 1};
        for (int j = 0; j < 6; ++j) traj.states.push_back(oracle::random_vec(rng, 3));
        Trajectory big = traj;
        for (Vec& q : big.states)
            for (double& x : q) x *= s;
        base.push_back(std::move(traj));
        scaled.push_back(std::move(big));
    }
    const AcquisitionScore a = score_of(base);
    const AcquisitionScore b = score_of(scaled);
    REQUIRE(a.omega.has_value());
    REQUIRE(b.omega.has_value());
    CHECK(*b.omega == doctest::Approx(s * s * *a.omega).epsilon(1e-12));
}

TEST_CASE("next sample follows the acquisition rule") {
    SplitMix64 rng(83);
    const auto sc = [](double alpha, double omega) {
        AcquisitionScore s;
        s.alpha = alpha;
        if (alpha < 1.0) s.omega = omega;
        return s;
    };

    // omega argmax within the max-alpha set
    CHECK(next_sample({{10, sc(0.0, 9.0)}, {20, sc(0.5, 1.0)}, {30, sc(0.5, 3.0)}}, rng) == 30);
    // a unique alpha maximum wins no matter the omegas
    CHECK(next_sample({{4, sc(0.2, 0.001)}, {5, sc(0.0, 100.0)}, {6, sc(0.1, 50.0)}}, rng) == 4);
    // with all alphas zero the rule is a pure omega argmax
    CHECK(next_sample({{0, sc(0.0, 1.0)}, {1, sc(0.0, 7.0)}, {2, sc(0.0, 2.0)}}, rng) == 1);
    // omega ties break toward the lowest candidate index
    CHECK(next_sample({{7, sc(0.0, 5.0)}, {3, sc(0.0, 5.0)}, {9, sc(0.0, 2.0)}}, rng) == 3);
}

TEST_CASE("alpha one triggers a uniform draw over the flagged set") {
    SplitMix64 rng(84);
    AcquisitionScore hot;
    hot.alpha = 1.0;
    AcquisitionScore cold;
    cold.alpha = 0.4;
    cold.omega = 2.0;
    const std::vector<std::pair<std::size_t, AcquisitionScore>> scores = {
        {11, hot}, {22, cold}, {33, hot}, {44, hot}};

    std::size_t counts[3] = {0, 0, 0};
    const std::size_t n_trials = 3000;
    for (std::size_t t = 0; t < n_trials; ++t) {
        const std::size_t pick = next_sample(scores, rng);
        if (pick == 11) ++counts[0];
        else if (pick == 33) ++counts[1];
        else if (pick == 44) ++counts[2];
        else FAIL("picked a candidate outside the max-alpha set");
    }
    // each of the three tied candidates should get about a third
    for (std::size_t c : counts) {
        CHECK(c > n_trials / 3 - 150);
        CHECK(c < n_trials / 3 + 150);
    }
}

TEST_CASE("next sample always returns a provided candidate") {
    SplitMix64 rng(85);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::pair<std::size_t, AcquisitionScore>> scores;
        const std::size_t n = 1 + rng.next_index(8);
        std::set<std::size_t> ids;
        for (std::size_t i = 0; i < n; ++i) {
            AcquisitionScore s;
            const double lvl = rng.next_unit();
            s.alpha = lvl < 0.3 ? 0.0 : (lvl < 0.6 ? 0.5 : 1.0);
            if (s.alpha < 1.0) s.omega = rng.next_unit() * 10.0;
            const std::size_t id = rng.next_index(100);
            if (!ids.insert(id).second) continue;
            scores.emplace_back(id, s);
        }
        if (scores.empty()) continue;
        // degenerate mixes (some alpha == 1 but not the max) cannot happen by
        // construction above; ensure max-alpha==1 sets carry no omega reliance
        const std::size_t pick = next_sample(scores, rng);
        CHECK(ids.count(pick) == 1);
    }
}

TEST_CASE("lhs covers every stratum once per axis") {
    const std::vector<AxisSpec> axes = {{"a", 0.0, 1.0, 20, false}, {"b", 0.0, 1.0, 20, false}};
    const CandidateSet grid = CandidateSet::tensor_grid(axes);
    SplitMix64 rng(86);
    const std::size_t n_p = 10;
    const std::vector<std::size_t> design = lhs_baseline(grid, n_p, 57, rng);
    REQUIRE(design.size() == n_p);
    CHECK(design[0] == 57);
    std::set<std::size_t> uniq(design.begin(), design.end());
    CHECK(uniq.size() == n_p);

    // the nine added points occupy nine distinct strata on each axis
    const std::size_t n_add = n_p - 1;
    for (std::size_t axis = 0; axis < 2; ++axis) {
        std::set<std::size_t> strata;
        for (std::size_t k = 1; k < design.size(); ++k) {
            const std::size_t idx = axis == 0 ? design[k] / 20 : design[k] % 20;
            std::size_t s = n_add;
            for (std::size_t cand = 0; cand < n_add; ++cand) {
                const std::size_t lo = cand * 20 / n_add;
                const std::size_t hi = (cand + 1) * 20 / n_add;
                if (idx >= lo && idx < hi) s = cand;
            }
            REQUIRE(s < n_add);
            strata.insert(s);
        }
        CHECK(strata.size() == n_add);
    }
}

TEST_CASE("lhs handles the saturated and trivial cases") {
    const CandidateSet grid = CandidateSet::tensor_grid({{"a", 0.0, 1.0, 6, false}});
    SplitMix64 rng(87);
    const std::vector<std::size_t> all = lhs_baseline(grid, 6, 3, rng);
    REQUIRE(all.size() == 6);
    CHECK(all[0] == 3);
    std::set<std::size_t> uniq(all.begin(), all.end());
    CHECK(uniq.size() == 6);

    const std::vector<std::size_t> one = lhs_baseline(grid, 1, 2, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 2);

    CHECK_THROWS_AS(lhs_baseline(grid, 7, 0, rng), std::invalid_argument);
}

TEST_CASE("lhs designs are reproducible from the seed") {
    const std::vector<AxisSpec> axes = {{"a", 0.0, 1.0, 10, false}, {"b", 0.0, 1.0, 10, false}};
    const CandidateSet grid = CandidateSet::tensor_grid(axes);
    SplitMix64 r1(88), r2(88), r3(1088);
    const auto a = lhs_baseline(grid, 6, 11, r1);
    const auto b = lhs_baseline(grid, 6, 11, r2);
    const auto c = lhs_baseline(grid, 6, 11, r3);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("omega is invariant under a rotation of the reduced coordinates") {
    SplitMix64 rng(89);
    const std::size_t r = 4;
    const auto st = linear_structure(r);
    const Mat q = oracle::random_orthonormal(rng, r, r);

    std::vector<RomRealization> draws, rotated;
    for (int l = 0; l < 6; ++l) {
        Mat a(r, r);
        for (std::size_t i = 0; i < r; ++i) {
            a(i, i) = -0.5 - rng.next_unit();
            for (std::size_t j = 0; j < r; ++j)
                if (i != j) a(i, j) = 0.2 * (2.0 * rng.next_unit() - 1.0);
        }
        // A -> Q^T A Q
        Mat aq = oracle::matmul(a, q);
        Mat qt = oracle::transpose(q);
        Mat rot = oracle::matmul(qt, aq);
        RomRealization rom, rom_rot;
        rom.structure = st;
        rom.op = a;
        rom_rot.structure = st;
        rom_rot.op = rot;
        draws.push_back(std::move(rom));
        rotated.push_back(std::move(rom_rot));
    }

    const Vec qhat0 = oracle::random_vec(rng, r);
    Vec qhat0_rot(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) qhat0_rot[i] += q(j, i) * qhat0[j];  // Q^T q0

    const TimeGrid grid{0.0, 1.0, 8, 10};
    const InstabilityGuard guard{1e4};
    const AcquisitionScore a = score_candidate(draws, {}, qhat0, grid, guard);
    const AcquisitionScore b = score_candidate(rotated, {}, qhat0_rot, grid, guard);
    CHECK(a.alpha == b.alpha);
    REQUIRE(a.omega.has_value());
    REQUIRE(b.omega.has_value());
    CHECK(*a.omega == doctest::Approx(*b.omega).epsilon(1e-10));
}

namespace {

CampaignConfig small_heat_campaign() {
    CampaignConfig config;
    const std::size_t n_grid = 12;
    auto sys = std::make_shared<PolynomialAffineSystem>(build_heat_fom(n_grid, 1.0));
    config.initial_state = build_heat_initial(n_grid);
    // enough samples that one training trajectory already overdetermines the
    // regression at the ranks this problem produces
    config.rom_grid = TimeGrid{0.0, 1.0, 41, 5};
    config.solve_fom = [sys, grid = config.rom_grid](const Vec& xi) {
        const Trajectory traj =
            integrate(*sys, xi, build_heat_initial(12), grid, InstabilityGuard{1e6});
        REQUIRE(traj.stable);
        Mat states(grid.n_t, sys->state_dim);
        for (std::size_t j = 0; j < grid.n_t; ++j) states.set_row(j, traj.states[j]);
        return states;
    };
    config.make_structure = [](std::size_t r) {
        std::vector<StructureBlock> blocks;
        blocks.push_back({BlockKind::Constant, [](const Vec& xi) { return xi.at(0); }, "c:k"});
        blocks.push_back({BlockKind::Constant, [](const Vec& xi) { return xi.at(1); }, "c:r"});
        blocks.push_back({BlockKind::Linear, [](const Vec& xi) { return xi.at(0); }, "A:k"});
        blocks.push_back({BlockKind::Linear, [](const Vec& xi) { return xi.at(1); }, "A:r"});
        blocks.push_back({BlockKind::Quadratic, [](const Vec& xi) { return xi.at(1); }, "H:r"});
        return std::make_shared<const StructureFunction>(r, 0, std::move(blocks));
    };
    config.shift_mode = ShiftMode::MeanSnapshot;
    config.rule = TruncationRule::residual_energy_below(1e-6);
    config.axes = {{"kappa", 1e-3, 1e-1, 3, true}, {"rho", 1.0, 5.0, 3, false}};
    config.n_acq_draws = 10;
    config.reg_grid.lambda1 = {1e-6, 1e-2};
    config.reg_grid.lambda2 = {1e-6, 1e-2};
    config.reg_grid.n_draws = 5;
    config.guard_multiplier = 100.0;
    return config;
}

}  // namespace

TEST_CASE("a budget of one runs a single iteration without selecting") {
    const CampaignConfig config = small_heat_campaign();
    const CampaignRecord record = run_campaign(config, CampaignMode::Adaptive, 4, 1, 5);
    REQUIRE(record.iterations.size() == 1);
    REQUIRE(record.sample_indices.size() == 1);
    CHECK(record.sample_indices[0] == 4);
    const IterationRecord& it = record.iterations[0];
    CHECK(it.n_p == 1);
    CHECK(it.chosen == kNoSelection);
    CHECK(it.r >= 1);
    CHECK(it.scores.size() == 9);
    CHECK(it.mean_reduced.size() == 9);
    CHECK(it.beta >= 0.0);
    CHECK(it.beta <= 1.0);
    std::size_t flagged = 0;
    for (const AcquisitionScore& s : it.scores)
        if (s.alpha > 0.0) ++flagged;
    CHECK(it.beta == doctest::Approx(static_cast<double>(flagged) / 9.0).epsilon(1e-15));
}

TEST_CASE("campaigns are deterministic and consume distinct candidates") {
    const CampaignConfig config = small_heat_campaign();
    const CampaignRecord a = run_campaign(config, CampaignMode::Adaptive, 2, 3, 17);
    const CampaignRecord b = run_campaign(config, CampaignMode::Adaptive, 2, 3, 17);

    CHECK(a.sample_indices == b.sample_indices);
    REQUIRE(a.iterations.size() == b.iterations.size());
    REQUIRE(a.iterations.size() == 3);
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        const IterationRecord& x = a.iterations[i];
        const IterationRecord& y = b.iterations[i];
        CHECK(x.n_p == i + 1);
        CHECK(x.r == y.r);
        CHECK(x.lambda1 == y.lambda1);
        CHECK(x.lambda2 == y.lambda2);
        CHECK(x.training_error == y.training_error);
        CHECK(x.beta == y.beta);
        CHECK(x.chosen == y.chosen);
        REQUIRE(x.scores.size() == y.scores.size());
        for (std::size_t c = 0; c < x.scores.size(); ++c) {
            CHECK(x.scores[c].alpha == y.scores[c].alpha);
            CHECK(x.scores[c].omega.has_value() == y.scores[c].omega.has_value());
            if (x.scores[c].omega.has_value()) CHECK(*x.scores[c].omega == *y.scores[c].omega);
        }
    }

    std::set<std::size_t> uniq(a.sample_indices.begin(), a.sample_indices.end());
    CHECK(uniq.size() == 3);
    CHECK(a.iterations.back().chosen == kNoSelection);

    const CampaignRecord lhs = run_campaign(config, CampaignMode::Lhs, 2, 3, 17);
    CHECK(lhs.sample_indices[0] == 2);
    std::set<std::size_t> uniq_lhs(lhs.sample_indices.begin(), lhs.sample_indices.end());
    CHECK(uniq_lhs.size() == 3);
}
