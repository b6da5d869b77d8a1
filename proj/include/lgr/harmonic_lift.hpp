#ifndef LGR_HARMONIC_LIFT_HPP
#define LGR_HARMONIC_LIFT_HPP

#include <lgr/assembly.hpp>
#include <lgr/electrodes.hpp>
#include <lgr/pcg.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lgr {

struct HarmonicLift {
    ScalarField h;
    BoundaryValues dh_dn;
    SolveStats stats;
};

// Outward normal derivative at the boundary nodes from the second-order
// one-sided stencil (3 u0 - 4 u1 + u2) / (2h) along the inward normal. A
// corner belongs to two sides and takes the mean of both one-sided values,
// matching the h/2 + h/2 split of its quadrature weight.
inline BoundaryValues outward_normal_derivative(const ScalarField& u) {
    const Grid& g = u.grid();
    const std::size_t m = g.n() - 1;
    const double inv2h = 0.5 / g.h();
    BoundaryValues out(g);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        double sum = 0.0;
        int sides = 0;
        if (j == 0) { sum += 3 * u(i, 0) - 4 * u(i, 1) + u(i, 2); ++sides; }
        if (j == m) { sum += 3 * u(i, m) - 4 * u(i, m - 1) + u(i, m - 2); ++sides; }
        if (i == 0) { sum += 3 * u(0, j) - 4 * u(1, j) + u(2, j); ++sides; }
        if (i == m) { sum += 3 * u(m, j) - 4 * u(m - 1, j) + u(m - 2, j); ++sides; }
        out[k] = sum * inv2h / sides;
    }
    return out;
}

inline ScalarField solve_laplace_dirichlet(const BoundaryValues& data, const Grid& grid,
                                           const SolveOptions& opt, SolveStats* stats = nullptr) {
    const SparseSystem sys = assemble_laplace_dirichlet(data, grid);
    SolveResult res = pcg_solve(sys, opt);
    if (stats) *stats = res.stats;
    ScalarField u(grid, std::move(res.x));
    // Identity rows reproduce the data only up to the solver tolerance.
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        auto [i, j] = grid.boundary_node(k);
        u(i, j) = data[k];
    }
    return u;
}

inline SolveOptions default_solve_options(const Grid& grid) {
    SolveOptions opt;
    opt.tol = 1e-10;
    opt.max_iter = default_max_iterations(grid);
    return opt;
}

// Harmonic function with boundary values c/b, plus its outward normal
// derivative.
inline HarmonicLift harmonic_lift(const RobinCoefficients& coeffs, const Grid& grid,
                                  const SolveOptions& opt) {
    require_same_grid(coeffs.b.grid(), grid, "harmonic_lift");
    require(coeffs.epsilon > 0.0, Error::Kind::degenerate,
            "harmonic_lift: epsilon = 0 leaves b = 0 off the electrodes, so c/b is undefined");
    BoundaryValues data(grid);
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        require(coeffs.b[k] > 0.0, Error::Kind::degenerate,
                "harmonic_lift: b vanishes at boundary position " + std::to_string(k));
        data[k] = coeffs.c[k] / coeffs.b[k];
    }
    SolveStats stats;
    ScalarField h = solve_laplace_dirichlet(data, grid, opt, &stats);
    require(stats.converged, Error::Kind::solver,
            "harmonic_lift: linear solve did not converge (residual " +
                std::to_string(stats.relative_residual) + ")");
    BoundaryValues dh = outward_normal_derivative(h);
    return HarmonicLift{std::move(h), std::move(dh), stats};
}

inline HarmonicLift harmonic_lift(const RobinCoefficients& coeffs, const Grid& grid) {
    return harmonic_lift(coeffs, grid, default_solve_options(grid));
}

} // namespace lgr

#endif
