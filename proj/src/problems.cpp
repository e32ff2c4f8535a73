#include "prom/problems.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <initializer_list>
#include <stdexcept>

#include "prom/rng.hpp"

namespace prom {

std::shared_ptr<const StructureFunction> heat_rom_structure(std::size_t r) {
    auto kappa = [](const Vec& xi) { return xi.at(0); };
    auto rho = [](const Vec& xi) { return xi.at(1); };
    std::vector<StructureBlock> blocks;
    blocks.push_back({BlockKind::Constant, kappa, "c:kappa"});
    blocks.push_back({BlockKind::Constant, rho, "c:rho"});
    blocks.push_back({BlockKind::Linear, kappa, "A:kappa"});
    blocks.push_back({BlockKind::Linear, rho, "A:rho"});
    blocks.push_back({BlockKind::Quadratic, rho, "H:rho"});
    return std::make_shared<const StructureFunction>(r, 0, std::move(blocks));
}

std::shared_ptr<const StructureFunction> burgers_rom_structure(std::size_t r) {
    auto nu = [](const Vec& xi) { return xi.at(0); };
    auto one = [](const Vec&) { return 1.0; };
    std::vector<StructureBlock> blocks;
    blocks.push_back({BlockKind::Linear, nu, "A:nu"});
    blocks.push_back({BlockKind::Quadratic, one, "H"});
    return std::make_shared<const StructureFunction>(r, 0, std::move(blocks));
}

namespace {

std::size_t stable_substeps(double sample_dt, double dt_limit) {
    require(dt_limit > 0.0, "problem: nonpositive stability limit");
    double n = std::ceil(sample_dt / dt_limit);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::string discretization_tag(std::initializer_list<double> reals) {
    std::uint64_t h = 0x51ed270b88c755d1ull;
    for (double v : reals) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = mix_seed(h, bits);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

BenchmarkProblem make_heat_problem(std::size_t n_grid, std::size_t points_per_axis, std::size_t n_t,
                                   std::size_t fom_substeps, std::size_t rom_substeps, double tau) {
    const double length = 1.0, t0 = 0.0, tf = 1.0;
    const double kappa_lo = 1e-3, kappa_hi = 1e-1;
    const double rho_lo = 1.0, rho_hi = 5.0;

    BenchmarkProblem p;
    p.kind = ProblemKind::Heat;
    p.fom = std::make_shared<const PolynomialAffineSystem>(build_heat_fom(n_grid, length));
    p.initial_state = build_heat_initial(n_grid);
    p.axes = {{"kappa", kappa_lo, kappa_hi, points_per_axis, true},
              {"rho", rho_lo, rho_hi, points_per_axis, false}};
    if (fom_substeps == 0) {
        // explicit RK4 diffusion limit at the stiffest candidate
        double h = length / static_cast<double>(n_grid - 1);
        double lambda_max = 4.0 * kappa_hi / (h * h);
        fom_substeps = stable_substeps((tf - t0) / static_cast<double>(n_t - 1), 2.4 / lambda_max);
    }
    p.fom_grid = TimeGrid{t0, tf, n_t, fom_substeps};
    p.rom_grid = TimeGrid{t0, tf, n_t, rom_substeps};
    p.shift_mode = ShiftMode::MeanSnapshot;
    p.rule = TruncationRule::residual_energy_below(tau);
    p.make_structure = heat_rom_structure;
    p.norm = SpatialNorm::L2;
    p.id = "heat-n" + std::to_string(n_grid) + "-nt" + std::to_string(n_t) + "-sub" +
           std::to_string(fom_substeps) + "-" + discretization_tag({length, t0, tf});
    return p;
}

BenchmarkProblem make_burgers_problem(std::size_t n_side, std::size_t n_candidates, std::size_t n_t,
                                      std::size_t fom_substeps, std::size_t rom_substeps, double tau) {
    const double t0 = 0.0, tf = 1.0;
    const double nu_lo = 1e-3, nu_hi = 2.5e-2;

    BenchmarkProblem p;
    p.kind = ProblemKind::Burgers;
    p.fom = std::make_shared<const PolynomialAffineSystem>(build_burgers_fom(n_side));
    p.initial_state = build_burgers_initial(n_side);
    p.axes = {{"nu", nu_lo, nu_hi, n_candidates, true}};
    if (fom_substeps == 0) {
        // advective limit dominates at this viscosity range (|u|+|v| <= 6)
        double h = 2.0 / static_cast<double>(n_side - 1);
        double dt_adv = 0.4 * h / 6.0;
        double dt_diff = 2.4 * h * h / (8.0 * nu_hi);
        fom_substeps = stable_substeps((tf - t0) / static_cast<double>(n_t - 1),
                                       dt_adv < dt_diff ? dt_adv : dt_diff);
    }
    p.fom_grid = TimeGrid{t0, tf, n_t, fom_substeps};
    p.rom_grid = TimeGrid{t0, tf, n_t, rom_substeps};
    p.shift_mode = ShiftMode::Zero;
    p.rule = TruncationRule::cumulative_energy_above(tau);
    p.make_structure = burgers_rom_structure;
    p.norm = SpatialNorm::L1L2;
    p.id = "burgers-n" + std::to_string(n_side) + "-nt" + std::to_string(n_t) + "-sub" +
           std::to_string(fom_substeps) + "-" + discretization_tag({t0, tf});
    return p;
}

BenchmarkProblem build_problem(const io::Config& cfg) {
    std::string kind = cfg.get("problem", "kind");
    std::size_t n_t = cfg.get_size_or("time", "n_t", kind == "heat" ? 101 : 100);
    std::size_t fom_sub = cfg.get_size_or("time", "fom_substeps", 0);
    std::size_t rom_sub = cfg.get_size_or("time", "rom_substeps", 2);

    BenchmarkProblem p;
    if (kind == "heat") {
        p = make_heat_problem(cfg.get_size_or("problem", "n_grid", 200),
                              cfg.get_size_or("domain", "points_per_axis", 10), n_t, fom_sub, rom_sub,
                              cfg.get_double_or("pod", "tau", 1e-6));
    } else if (kind == "burgers") {
        p = make_burgers_problem(cfg.get_size_or("problem", "n_side", 41),
                                 cfg.get_size_or("domain", "points_per_axis", 25), n_t, fom_sub, rom_sub,
                                 cfg.get_double_or("pod", "tau", 0.995));
    } else {
        throw std::invalid_argument("problem: unknown kind '" + kind + "'");
    }
    p.fom_guard = cfg.get_double_or("time", "fom_guard", p.fom_guard);
    return p;
}

}  // namespace prom
