#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "prom/regsearch.hpp"
#include "prom/rom.hpp"

using namespace prom;

namespace {

std::shared_ptr<const StructureFunction> heat_like(std::size_t r) {
    std::vector<StructureBlock> blocks;
    blocks.push_back({BlockKind::Constant, [](const Vec& xi) { return xi.at(0); }, "c:a"});
    blocks.push_back({BlockKind::Constant, [](const Vec& xi) { return xi.at(1); }, "c:b"});
    blocks.push_back({BlockKind::Linear, [](const Vec& xi) { return xi.at(0); }, "A:a"});
    blocks.push_back({BlockKind::Linear, [](const Vec& xi) { return xi.at(1); }, "A:b"});
    blocks.push_back({BlockKind::Quadratic, [](const Vec& xi) { return xi.at(1); }, "H:b"});
    return std::make_shared<StructureFunction>(r, 0, std::move(blocks));
}

ReducedTrainingSet training_from(const RomRealization& truth, const std::vector<Vec>& params,
                                 const Vec& q0, const TimeGrid& grid,
                                 const InstabilityGuard& guard) {
    ReducedTrainingSet set;
    set.parameters = params;
    set.grid = grid;
    for (const Vec& xi : params) {
        const Trajectory traj = integrate(truth, xi, q0, grid, guard);
        REQUIRE(traj.stable);
        Mat reduced(grid.n_t, q0.size());
        for (std::size_t j = 0; j < grid.n_t; ++j) reduced.set_row(j, traj.states[j]);
        set.reduced.push_back(std::move(reduced));
    }
    return set;
}

// the documented ranking, replayed over the diagnostics table
RegPairDiagnostics rank_oracle(const std::vector<RegPairDiagnostics>& table) {
    REQUIRE(!table.empty());
    RegPairDiagnostics best = table.front();
    for (std::size_t i = 1; i < table.size(); ++i) {
        const RegPairDiagnostics& d = table[i];
        bool better;
        if (d.all_stable != best.all_stable)
            better = d.all_stable;
        else if (d.all_stable)
            better = d.e_train < best.e_train;
        else if (d.n_unstable_events != best.n_unstable_events)
            better = d.n_unstable_events < best.n_unstable_events;
        else if (d.e_train != best.e_train)
            better = d.e_train < best.e_train;
        else if (d.lambda2 != best.lambda2)
            better = d.lambda2 > best.lambda2;
        else
            better = d.lambda1 > best.lambda1;
        if (better) best = d;
    }
    return best;
}

}  // namespace

TEST_CASE("regularizer layout follows the block kinds") {
    const auto st = heat_like(2);  // widths 1,1,2,2,3 -> total 9
    const Vec g = build_regularizer(0.25, 8.0, *st);
    REQUIRE(g.size() == 9);
    for (std::size_t j = 0; j < 6; ++j) CHECK(g[j] == 0.25);
    for (std::size_t j = 6; j < 9; ++j) CHECK(g[j] == 8.0);

    // quadratic-only tail with lambda1 = 0 leaves the leading columns free
    std::vector<StructureBlock> blocks;
    blocks.push_back({BlockKind::Linear, [](const Vec& xi) { return xi.at(0); }, "A"});
    blocks.push_back({BlockKind::Quadratic, [](const Vec&) { return 1.0; }, "H"});
    const StructureFunction burgers(3, 0, std::move(blocks));
    const Vec gb = build_regularizer(0.0, 2.0, burgers);
    REQUIRE(gb.size() == 3 + 6);
    for (std::size_t j = 0; j < 3; ++j) CHECK(gb[j] == 0.0);
    for (std::size_t j = 3; j < 9; ++j) CHECK(gb[j] == 2.0);

    CHECK_THROWS(build_regularizer(-1.0, 1.0, burgers));
}

TEST_CASE("default grid spans 1e-10 to 1e4 two decades apart") {
    const RegGrid g = RegGrid::default_grid();
    REQUIRE(g.lambda1.size() == 8);
    REQUIRE(g.lambda2.size() == 8);
    CHECK(g.n_draws == 20);
    for (std::size_t i = 0; i < 8; ++i) {
        const double want = std::pow(10.0, -10.0 + 2.0 * static_cast<double>(i));
        CHECK(g.lambda1[i] == doctest::Approx(want).epsilon(1e-14));
        CHECK(g.lambda2[i] == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("training reconstruction error has the documented form") {
    Mat truth(2, 2), mean(2, 2);
    truth(0, 0) = 1.0; truth(0, 1) = 2.0;   // |row|^2 = 5
    truth(1, 0) = 0.0; truth(1, 1) = 3.0;   // |row|^2 = 9
    mean(0, 0) = 1.5; mean(0, 1) = 2.0;     // err^2 = 0.25
    mean(1, 0) = 0.0; mean(1, 1) = 2.0;     // err^2 = 1
    const double got = training_reconstruction_error({truth}, {mean});
    CHECK(got == doctest::Approx(0.5 * (0.25 / 5.0 + 1.0 / 9.0)).epsilon(1e-14));

    CHECK(training_reconstruction_error({truth}, {truth}) == 0.0);
}

TEST_CASE("training error skips negligible snapshots and can be undefined") {
    SplitMix64 rng(71);
    Mat truth(3, 2), mean(3, 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) {
            truth(j, k) = 1.0 + rng.next_unit();
            mean(j, k) = truth(j, k) + 0.1;
        }
    truth(2, 0) = 1e-15; truth(2, 1) = 0.0;  // below the norm floor
    mean(2, 0) = 42.0; mean(2, 1) = -7.0;    // must not matter
    Mat truth_head(2, 2), mean_head(2, 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) {
            truth_head(j, k) = truth(j, k);
            mean_head(j, k) = mean(j, k);
        }
    CHECK(training_reconstruction_error({truth}, {mean}) ==
          training_reconstruction_error({truth_head}, {mean_head}));

    Mat zero(2, 2);
    CHECK(std::isinf(training_reconstruction_error({zero}, {zero})));
}

TEST_CASE("training error is invariant to the parameter order") {
    SplitMix64 rng(72);
    std::vector<Mat> truth, mean;
    for (int i = 0; i < 4; ++i) {
        truth.push_back(oracle::random_mat(rng, 6, 3));
        Mat m = truth.back();
        for (std::size_t j = 0; j < m.size(); ++j)
            m.data()[j] += 0.01 * (2.0 * rng.next_unit() - 1.0);
        mean.push_back(std::move(m));
    }
    std::vector<Mat> truth_rev(truth.rbegin(), truth.rend());
    std::vector<Mat> mean_rev(mean.rbegin(), mean.rend());
    const double a = training_reconstruction_error(truth, mean);
    const double b = training_reconstruction_error(truth_rev, mean_rev);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("the selected pair replays the documented ranking") {
    const auto st = heat_like(2);
    RomRealization truth;
    truth.structure = st;
    truth.op = Mat(2, st->width());
    truth.op(0, 0) = 0.1;  truth.op(1, 0) = -0.2;   // c:a column
    truth.op(0, 4) = -0.5; truth.op(1, 5) = -0.7;   // A:b = diag(-0.5, -0.7)
    truth.op(0, 6) = 0.05; truth.op(1, 8) = -0.04;  // small quadratic entries

    const std::vector<Vec> params = {Vec{0.05, 2.0}, Vec{0.08, 4.0}};
    const Vec q0 = {0.4, -0.3};
    const TimeGrid grid{0.0, 1.0, 21, 5};
    const InstabilityGuard guard{1e3};
    const ReducedTrainingSet training = training_from(truth, params, q0, grid, guard);
    const RegressionData data =
        assemble_data_matrix(training.reduced, {}, params, grid, *st);

    RegGrid reg;
    reg.lambda1 = {1e-8, 1e-2, 1e2};
    reg.lambda2 = {1e-8, 1e-2, 1e2};
    reg.n_draws = 5;
    const RegChoice choice = select_regularization(data, training, st, nullptr, reg, guard, 11);

    REQUIRE(choice.diagnostics.size() == 9);
    const RegPairDiagnostics want = rank_oracle(choice.diagnostics);
    CHECK(choice.lambda1 == want.lambda1);
    CHECK(choice.lambda2 == want.lambda2);
    CHECK(choice.training_error == want.e_train);
    CHECK(choice.all_draws_stable == want.all_stable);

    // the truth system is stable and exactly representable, so the winner
    // fits the training data well
    CHECK(choice.all_draws_stable);
    CHECK(choice.training_error < 1e-2);
}

TEST_CASE("a stable pair beats every unstable one") {
    const auto st = heat_like(2);
    RomRealization truth;
    truth.structure = st;
    truth.op = Mat(2, st->width());
    truth.op(0, 4) = 1.5; truth.op(1, 5) = 1.5;  // A:b = +1.5 I, grows as e^{1.5 rho t}

    const std::vector<Vec> params = {Vec{0.05, 2.0}};
    const Vec q0 = {1.0, 0.2};
    // short horizon so the training trajectory itself stays under the guard
    const TimeGrid train_grid{0.0, 0.2, 21, 5};
    const InstabilityGuard train_guard{1e3};
    const ReducedTrainingSet training = training_from(truth, params, q0, train_grid, train_guard);
    const RegressionData data =
        assemble_data_matrix(training.reduced, {}, params, train_grid, *st);

    // now search with a guard tight enough that the recovered dynamics blow
    // through it while heavily shrunk operators stay frozen near q0
    ReducedTrainingSet long_training = training;
    long_training.grid = TimeGrid{0.0, 1.0, 21, 5};
    RegGrid reg;
    reg.lambda1 = {1e-10, 1e4};
    reg.lambda2 = {1e-10, 1e4};
    reg.n_draws = 5;
    const RegChoice choice = select_regularization(data, long_training, st, nullptr, reg,
                                                   InstabilityGuard{3.0}, 13);

    bool some_unstable = false;
    for (const RegPairDiagnostics& d : choice.diagnostics)
        if (!d.all_stable) some_unstable = true;
    REQUIRE(some_unstable);
    CHECK(choice.all_draws_stable);
    const RegPairDiagnostics want = rank_oracle(choice.diagnostics);
    CHECK(choice.lambda1 == want.lambda1);
    CHECK(choice.lambda2 == want.lambda2);
}

TEST_CASE("a single-pair grid is returned regardless of stability") {
    const auto st = heat_like(2);
    RomRealization truth;
    truth.structure = st;
    truth.op = Mat(2, st->width());
    truth.op(0, 4) = 2.0; truth.op(1, 5) = 2.0;
    const std::vector<Vec> params = {Vec{0.05, 2.0}};
    const TimeGrid grid{0.0, 0.2, 11, 5};
    const ReducedTrainingSet training =
        training_from(truth, params, {0.5, 0.5}, grid, InstabilityGuard{1e3});
    const RegressionData data = assemble_data_matrix(training.reduced, {}, params, grid, *st);

    RegGrid reg;
    reg.lambda1 = {1e-6};
    reg.lambda2 = {1e-6};
    reg.n_draws = 3;
    ReducedTrainingSet long_training = training;
    long_training.grid = TimeGrid{0.0, 2.0, 11, 5};
    const RegChoice choice = select_regularization(data, long_training, st, nullptr, reg,
                                                   InstabilityGuard{1.5}, 17);
    CHECK(choice.lambda1 == 1e-6);
    CHECK(choice.lambda2 == 1e-6);
    REQUIRE(choice.diagnostics.size() == 1);
}

TEST_CASE("selection is deterministic and writes parseable diagnostics") {
    const auto st = heat_like(2);
    RomRealization truth;
    truth.structure = st;
    truth.op = Mat(2, st->width());
    truth.op(0, 4) = -0.6; truth.op(1, 5) = -0.9;
    const std::vector<Vec> params = {Vec{0.05, 2.0}, Vec{0.02, 3.0}};
    const TimeGrid grid{0.0, 1.0, 15, 5};
    const InstabilityGuard guard{1e3};
    const ReducedTrainingSet training =
        training_from(truth, params, {0.3, -0.2}, grid, guard);
    const RegressionData data = assemble_data_matrix(training.reduced, {}, params, grid, *st);

    RegGrid reg;
    reg.lambda1 = {1e-6, 1e-1};
    reg.lambda2 = {1e-6, 1e-1};
    reg.n_draws = 4;
    const RegChoice a = select_regularization(data, training, st, nullptr, reg, guard, 29);
    const RegChoice b = select_regularization(data, training, st, nullptr, reg, guard, 29);
    CHECK(a.lambda1 == b.lambda1);
    CHECK(a.lambda2 == b.lambda2);
    CHECK(a.training_error == b.training_error);
    REQUIRE(a.diagnostics.size() == b.diagnostics.size());
    for (std::size_t i = 0; i < a.diagnostics.size(); ++i) {
        CHECK(a.diagnostics[i].e_train == b.diagnostics[i].e_train);
        CHECK(a.diagnostics[i].n_unstable_events == b.diagnostics[i].n_unstable_events);
    }

    std::ostringstream os;
    write_reg_diagnostics_csv(a, os);
    const std::string text = os.str();
    CHECK(text.rfind("lambda1,lambda2,n_unstable_events,e_train\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 1 + a.diagnostics.size());
}
