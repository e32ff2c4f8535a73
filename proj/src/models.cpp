#include "prom/models.hpp"

#include <algorithm>
#include <cmath>

namespace prom {

void PolynomialAffineSystem::validate() const {
    require(state_dim > 0, "system: state_dim must be positive");
    require(constant_blocks.size() == theta_constant.size(),
            "system: constant block/theta count mismatch");
    require(linear_blocks.size() == theta_linear.size(),
            "system: linear block/theta count mismatch");
    require(quadratic_blocks.size() == theta_quadratic.size(),
            "system: quadratic block/theta count mismatch");
    require(input_blocks.size() == theta_input.size(), "system: input block/theta count mismatch");
    for (const Vec& c : constant_blocks)
        require(c.size() == state_dim, "system: constant block dimension mismatch");
    for (const SparseMatrix& a : linear_blocks)
        require(a.rows() == state_dim && a.cols() == state_dim,
                "system: linear block dimension mismatch");
    for (const SparseQuadratic& h : quadratic_blocks)
        require(h.dim() == state_dim, "system: quadratic block dimension mismatch");
    for (const Mat& b : input_blocks)
        require(b.rows() == state_dim && b.cols() == input_dim,
                "system: input block dimension mismatch");
}

void PolynomialAffineSystem::rhs(const Vec& xi, const Vec& q, const Vec& u, Vec& out) const {
    require(q.size() == state_dim, "rhs: state dimension mismatch");
    require(input_blocks.empty() || u.size() == input_dim, "rhs: input dimension mismatch");
    out.assign(state_dim, 0.0);
    for (std::size_t l = 0; l < constant_blocks.size(); ++l)
        kernels::axpy(theta_constant[l](xi), constant_blocks[l].data(), out.data(), state_dim);
    for (std::size_t l = 0; l < linear_blocks.size(); ++l)
        linear_blocks[l].apply_add(theta_linear[l](xi), q.data(), out.data());
    for (std::size_t l = 0; l < quadratic_blocks.size(); ++l)
        quadratic_blocks[l].apply_add(theta_quadratic[l](xi), q.data(), out.data());
    for (std::size_t l = 0; l < input_blocks.size(); ++l) {
        const double w = theta_input[l](xi);
        const Mat& b = input_blocks[l];
        for (std::size_t i = 0; i < state_dim; ++i)
            out[i] += w * kernels::dot(b.row(i), u.data(), input_dim);
    }
}

Vec PolynomialAffineSystem::rhs(const Vec& xi, const Vec& q) const {
    Vec out;
    rhs(xi, q, Vec{}, out);
    return out;
}

Trajectory integrate(const PolynomialAffineSystem& sys, const Vec& xi, const Vec& q0,
                     const TimeGrid& grid, const InstabilityGuard& guard) {
    require(q0.size() == sys.state_dim, "integrate: initial state dimension mismatch");
    // freeze the coefficient values once; xi is fixed along a trajectory
    Vec wc(sys.constant_blocks.size()), wa(sys.linear_blocks.size()),
        wh(sys.quadratic_blocks.size());
    for (std::size_t l = 0; l < wc.size(); ++l) wc[l] = sys.theta_constant[l](xi);
    for (std::size_t l = 0; l < wa.size(); ++l) wa[l] = sys.theta_linear[l](xi);
    for (std::size_t l = 0; l < wh.size(); ++l) wh[l] = sys.theta_quadratic[l](xi);
    require(sys.input_blocks.empty(), "integrate: systems with inputs need an input signal");
    const auto rhs = [&](double, const Vec& q, Vec& out) {
        out.assign(sys.state_dim, 0.0);
        for (std::size_t l = 0; l < wc.size(); ++l)
            kernels::axpy(wc[l], sys.constant_blocks[l].data(), out.data(), sys.state_dim);
        for (std::size_t l = 0; l < wa.size(); ++l)
            sys.linear_blocks[l].apply_add(wa[l], q.data(), out.data());
        for (std::size_t l = 0; l < wh.size(); ++l)
            sys.quadratic_blocks[l].apply_add(wh[l], q.data(), out.data());
    };
    return integrate_rk4(rhs, q0, grid, guard);
}

PolynomialAffineSystem build_heat_fom(std::size_t n_grid, double length) {
    if (n_grid < 3) throw std::invalid_argument("heat: need at least 3 grid points");
    require(length > 0.0, "heat: domain length must be positive");
    const std::size_t n = n_grid - 2;  // interior nodes carry the state
    const double h = length / static_cast<double>(n_grid - 1);
    const double ih2 = 1.0 / (h * h);

    PolynomialAffineSystem sys;
    sys.state_dim = n;
    sys.input_dim = 0;

    Vec c(n, 0.0);
    c[n - 1] = ih2;  // Dirichlet value q(L) = 1 enters the last interior row
    sys.constant_blocks.push_back(std::move(c));
    sys.theta_constant.push_back([](const Vec& xi) { return xi.at(0); });

    SparseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a.add(i, i, -2.0 * ih2);
        if (i > 0) a.add(i, i - 1, ih2);
        if (i + 1 < n) a.add(i, i + 1, ih2);
    }
    sys.linear_blocks.push_back(std::move(a));
    sys.theta_linear.push_back([](const Vec& xi) { return xi.at(0); });

    SparseQuadratic hq(n);
    for (std::size_t i = 0; i < n; ++i) hq.add(i, i, i, -1.0);
    sys.quadratic_blocks.push_back(std::move(hq));
    sys.theta_quadratic.push_back([](const Vec& xi) { return xi.at(1); });

    sys.validate();
    return sys;
}

Vec build_heat_initial(std::size_t n_grid) {
    if (n_grid < 3) throw std::invalid_argument("heat: need at least 3 grid points");
    const std::size_t n = n_grid - 2;
    const double h = 1.0 / static_cast<double>(n_grid - 1);
    Vec q0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = h * static_cast<double>(i + 1);
        const double bump = 6.0 * std::exp(-x) * (1.0 - x) * (1.0 - x) -
                            10.0 * std::exp(x) * std::sin(x / 6.0);
        q0[i] = x * (1.0 - x) * bump + x;
    }
    return q0;
}

PolynomialAffineSystem build_burgers_fom(std::size_t n_side) {
    if (n_side < 3) throw std::invalid_argument("burgers: need at least 3 points per side");
    const std::size_t nf = n_side * n_side;  // nodes per field
    const std::size_t n = 2 * nf;            // state [u; v]
    const double h = 2.0 / static_cast<double>(n_side - 1);
    const double ih = 1.0 / h;
    const double ih2 = ih * ih;
    const auto id = [n_side](std::size_t ix, std::size_t iy) { return ix * n_side + iy; };

    PolynomialAffineSystem sys;
    sys.state_dim = n;
    sys.input_dim = 0;

    // nu (u_xx + u_yy), nu (v_xx + v_yy); boundary rows stay identically zero
    SparseMatrix a(n, n);
    for (std::size_t f = 0; f < 2; ++f) {
        const std::size_t off = f * nf;
        for (std::size_t ix = 1; ix + 1 < n_side; ++ix)
            for (std::size_t iy = 1; iy + 1 < n_side; ++iy) {
                const std::size_t row = off + id(ix, iy);
                a.add(row, row, -4.0 * ih2);
                a.add(row, off + id(ix - 1, iy), ih2);
                a.add(row, off + id(ix + 1, iy), ih2);
                a.add(row, off + id(ix, iy - 1), ih2);
                a.add(row, off + id(ix, iy + 1), ih2);
            }
    }
    sys.linear_blocks.push_back(std::move(a));
    sys.theta_linear.push_back([](const Vec& xi) { return xi.at(0); });

    // -(u u_x + v u_y) and -(u v_x + v v_y), backward differences (the
    // benchmark pulses keep both velocities nonnegative, so the upwind
    // direction is fixed and the term stays exactly quadratic)
    SparseQuadratic hq(n);
    for (std::size_t ix = 1; ix + 1 < n_side; ++ix)
        for (std::size_t iy = 1; iy + 1 < n_side; ++iy) {
            const std::size_t iu = id(ix, iy);
            const std::size_t iv = nf + iu;
            const std::size_t iu_xm = id(ix - 1, iy), iu_ym = id(ix, iy - 1);
            const std::size_t iv_xm = nf + id(ix - 1, iy), iv_ym = nf + id(ix, iy - 1);
            hq.add(iu, iu, iu, -ih);
            hq.add(iu, iu, iu_xm, ih);
            hq.add(iu, iv, iu, -ih);
            hq.add(iu, iv, iu_ym, ih);
            hq.add(iv, iu, iv, -ih);
            hq.add(iv, iu, iv_xm, ih);
            hq.add(iv, iv, iv, -ih);
            hq.add(iv, iv, iv_ym, ih);
        }
    sys.quadratic_blocks.push_back(std::move(hq));
    sys.theta_quadratic.push_back([](const Vec&) { return 1.0; });

    sys.validate();
    return sys;
}

Vec build_burgers_initial(std::size_t n_side) {
    if (n_side < 3) throw std::invalid_argument("burgers: need at least 3 points per side");
    const std::size_t nf = n_side * n_side;
    const double h = 2.0 / static_cast<double>(n_side - 1);
    Vec q0(2 * nf, 0.0);
    const auto inside = [](double z, double lo, double hi) {
        return z >= lo - 1e-12 && z <= hi + 1e-12;
    };
    for (std::size_t ix = 0; ix < n_side; ++ix)
        for (std::size_t iy = 0; iy < n_side; ++iy) {
            const double x = h * static_cast<double>(ix);
            const double y = h * static_cast<double>(iy);
            const std::size_t k = ix * n_side + iy;
            if (inside(x, 0.5, 1.0) && inside(y, 0.5, 1.0)) q0[k] = 2.0;
            if (inside(x, 0.25, 0.75) && inside(y, 0.25, 0.75)) q0[nf + k] = 4.0;
        }
    return q0;
}

}  // namespace prom
