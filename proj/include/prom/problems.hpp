#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "prom/active.hpp"
#include "prom/io.hpp"
#include "prom/models.hpp"

// The two benchmark configurations: programs assemble them from an INI file,
// tests from the factory functions.

namespace prom {

enum class ProblemKind { Heat, Burgers };
enum class SpatialNorm { L2, L1L2 };

struct BenchmarkProblem {
    ProblemKind kind = ProblemKind::Heat;
    std::string id;  // names the discretization; keys the on-disk FOM cache
    std::shared_ptr<const PolynomialAffineSystem> fom;
    Vec initial_state;
    std::vector<AxisSpec> axes;
    TimeGrid fom_grid, rom_grid;
    ShiftMode shift_mode = ShiftMode::MeanSnapshot;
    TruncationRule rule = TruncationRule::residual_energy_below(1e-6);
    std::function<std::shared_ptr<const StructureFunction>(std::size_t)> make_structure;
    SpatialNorm norm = SpatialNorm::L2;
    double fom_guard = 1e6;
};

// reduced structures mirroring the Galerkin projection of each FOM
std::shared_ptr<const StructureFunction> heat_rom_structure(std::size_t r);
std::shared_ptr<const StructureFunction> burgers_rom_structure(std::size_t r);

// fom_substeps = 0 picks a step from the diffusion/advection stability limits
BenchmarkProblem make_heat_problem(std::size_t n_grid = 200, std::size_t points_per_axis = 10,
                                   std::size_t n_t = 101, std::size_t fom_substeps = 0,
                                   std::size_t rom_substeps = 2, double tau = 1e-6);
BenchmarkProblem make_burgers_problem(std::size_t n_side = 41, std::size_t n_candidates = 25,
                                      std::size_t n_t = 100, std::size_t fom_substeps = 0,
                                      std::size_t rom_substeps = 2, double tau = 0.995);

BenchmarkProblem build_problem(const io::Config& cfg);

}  // namespace prom
