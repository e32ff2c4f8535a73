#include "prom/rom.hpp"

#include "prom/kernels.hpp"

namespace prom {

Vec rom_rhs(const RomRealization& rom, const Vec& xi, const Vec& qhat, const Vec& u) {
    const StructureFunction& st = *rom.structure;
    require(rom.op.rows() == st.r() && rom.op.cols() == st.width(),
            "rom_rhs: operator does not conform to the structure");
    Vec data(st.width());
    st.evaluate(qhat, u, xi, data.data());
    Vec out(st.r());
    kernels::gemv_row(rom.op.data(), rom.op.rows(), rom.op.cols(), data.data(), out.data());
    return out;
}

Trajectory integrate(const RomRealization& rom, const Vec& xi, const Vec& qhat0,
                     const TimeGrid& grid, const InstabilityGuard& guard) {
    const StructureFunction& st = *rom.structure;
    require(rom.op.rows() == st.r() && rom.op.cols() == st.width(),
            "integrate: operator does not conform to the structure");
    require(qhat0.size() == st.r(), "integrate: reduced state dimension mismatch");
    const Vec wts = st.weights(xi);
    Vec data(st.width());
    const Vec u;  // the benchmark structures carry no input blocks
    const auto rhs = [&](double, const Vec& q, Vec& out) {
        st.evaluate_weighted(q, u, wts, data.data());
        kernels::gemv_row(rom.op.data(), rom.op.rows(), rom.op.cols(), data.data(), out.data());
    };
    return integrate_rk4(rhs, qhat0, grid, guard);
}

RomEnsembleSolution solve_ensemble(const std::vector<RomRealization>& draws, const Vec& xi,
                                   const Vec& qhat0, const TimeGrid& grid,
                                   const InstabilityGuard& guard) {
    require(!draws.empty(), "solve_ensemble: need at least one draw");
    RomEnsembleSolution out;
    out.trajectories.reserve(draws.size());
    for (const RomRealization& draw : draws)
        out.trajectories.push_back(integrate(draw, xi, qhat0, grid, guard));
    compute_ensemble_statistics(out);
    return out;
}

void compute_ensemble_statistics(RomEnsembleSolution& out) {
    require(!out.trajectories.empty(), "ensemble: no trajectories");
    out.stable_set.clear();
    out.n_unstable = 0;
    out.mean = Mat();
    out.variance = Mat();
    for (std::size_t l = 0; l < out.trajectories.size(); ++l) {
        if (out.trajectories[l].stable)
            out.stable_set.push_back(l);
        else
            ++out.n_unstable;
    }
    if (out.stable_set.empty()) return;

    const std::size_t n_t = out.trajectories[out.stable_set.front()].states.size();
    const std::size_t r = out.trajectories[out.stable_set.front()].states.front().size();
    const double ns = static_cast<double>(out.stable_set.size());
    out.mean = Mat(n_t, r);
    out.variance = Mat(n_t, r);
    for (std::size_t l : out.stable_set)
        for (std::size_t j = 0; j < n_t; ++j)
            kernels::axpy(1.0, out.trajectories[l].states[j].data(), out.mean.row(j), r);
    for (std::size_t i = 0; i < out.mean.size(); ++i) out.mean.data()[i] /= ns;
    if (out.stable_set.size() > 1) {
        for (std::size_t l : out.stable_set)
            for (std::size_t j = 0; j < n_t; ++j)
                kernels::sq_diff_accum(out.trajectories[l].states[j].data(), out.mean.row(j),
                                       out.variance.row(j), r);
        for (std::size_t i = 0; i < out.variance.size(); ++i)
            out.variance.data()[i] /= ns - 1.0;
    }
}

double total_variance(const RomEnsembleSolution& ensemble) {
    require(ensemble.has_stats(), "total_variance: no stable draws");
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < ensemble.variance.size(); ++i) {
        const double y = ensemble.variance.data()[i] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace prom
