#ifndef LGR_BREGMAN_HPP
#define LGR_BREGMAN_HPP

#include <lgr/assembly.hpp>
#include <lgr/grid.hpp>
#include <lgr/harmonic_lift.hpp>
#include <lgr/pcg.hpp>
#include <lgr/recon.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lgr {

struct BregmanConfig {
    double rho = 1.0;
    std::size_t max_iterations = 500;
    double tol = 1e-6;
    double grad_floor = 1e-8;
    double inner_tol = 1e-10;
    Preconditioner preconditioner = Preconditioner::ic0;

    void validate() const {
        require(rho > 0.0, Error::Kind::invalid_argument, "rho must be positive");
        require(max_iterations >= 1, Error::Kind::invalid_argument, "max_iterations must be at least 1");
        require(tol >= 0.0, Error::Kind::invalid_argument, "tol must be nonnegative");
        require(grad_floor > 0.0, Error::Kind::invalid_argument, "grad_floor must be positive");
        require(inner_tol > 0.0 && inner_tol < 1.0, Error::Kind::invalid_argument, "inner_tol must lie in (0, 1)");
    }
};

// Rows use the recon report layout: terms.tv holds the weighted TV,
// rel_sigma_change the relative change of v.
struct BregmanResult {
    ScalarField v;
    ReconReport report;
};

// Isotropic shrinkage: d = keep * w with |d| = max(|w| - t, 0).
inline double shrink_factor(double wx, double wy, double threshold) {
    const double mag = std::hypot(wx, wy);
    return mag > 0.0 ? std::max(mag - threshold, 0.0) / mag : 0.0;
}

// Split Bregman for min sum_cells abar |grad v| h^2 with trace(v) fixed,
// splitting d = grad v. The v-step minimizes rho/2 |d - g - grad v|^2 over
// the interior; it is taken as one preconditioned step
//   v_I += L_I^{-1} G^T (d - g - G v)
// with L the 5-point Laplacian. L dominates G^T G for the cell gradient, so
// this is a linearized ADMM step and the iteration keeps the exact weighted TV
// minimizer as its fixed point. When G^T G = L it is the exact Poisson solve.
inline BregmanResult split_bregman_minimize(const ScalarField& a, const BoundaryValues& trace,
                                            const BregmanConfig& config, const Grid& grid,
                                            const std::optional<ScalarField>& ground_truth = std::nullopt) {
    config.validate();
    require_same_grid(a.grid(), grid, "split_bregman_minimize");
    require_same_grid(trace.grid(), grid, "split_bregman_minimize");
    require(a.all_finite() && a.min() >= 0.0, Error::Kind::invalid_argument,
            "split_bregman_minimize: weight must be finite and nonnegative");
    for (std::size_t k = 0; k < trace.size(); ++k) {
        require(std::isfinite(trace[k]), Error::Kind::invalid_argument,
                "split_bregman_minimize: non-finite trace value at position " + std::to_string(k));
    }
    if (ground_truth) require_same_grid(ground_truth->grid(), grid, "split_bregman_minimize");

    SolveOptions opt = default_solve_options(grid);
    opt.tol = config.inner_tol;
    opt.preconditioner = config.preconditioner;

    BregmanResult out{solve_laplace_dirichlet(trace, grid, opt), {}};
    if (a.max() == 0.0) {
        out.report.converged = true;
        return out;
    }

    ScalarField& v = out.v;
    const std::vector<double> abar = cell_means(a);
    const double h2 = grid.h() * grid.h();
    SparseSystem sys = assemble_laplace_dirichlet(BoundaryValues(grid), grid);

    VectorField gv = gradient(v);
    VectorField d(grid);
    VectorField b(grid);  // Bregman variable
    VectorField r(grid);
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        // Shrinkage, then the Bregman update.
        for (std::size_t c = 0; c < d.x.size(); ++c) {
            const double wx = gv.x[c] + b.x[c];
            const double wy = gv.y[c] + b.y[c];
            const double keep = shrink_factor(wx, wy, abar[c] / config.rho);
            d.x[c] = keep * wx;
            d.y[c] = keep * wy;
            b.x[c] = wx - d.x[c];
            b.y[c] = wy - d.y[c];
        }
        for (std::size_t c = 0; c < r.x.size(); ++c) {
            r.x[c] = d.x[c] - b.x[c] - gv.x[c];
            r.y[c] = d.y[c] - b.y[c] - gv.y[c];
        }
        // G^T r = -div r; boundary rows stay zero so the trace is untouched.
        const ScalarField div = divergence(r);
        for (std::size_t j = 1; j + 1 < grid.n(); ++j) {
            for (std::size_t i = 1; i + 1 < grid.n(); ++i) {
                sys.rhs[grid.index(i, j)] = -div(i, j) * h2;
            }
        }
        const SolveResult corr = pcg_solve(sys, opt);
        if (!corr.stats.converged) {
            throw Error(Error::Kind::solver, "split_bregman_minimize: Poisson solve failed at iteration " +
                                                 std::to_string(it) + " (relative residual " +
                                                 std::to_string(corr.stats.relative_residual) + ")");
        }
        double change = 0.0, norm = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!grid.is_boundary(k % grid.n(), k / grid.n())) {
                change += corr.x[k] * corr.x[k];
                v[k] += corr.x[k];
            }
            norm += v[k] * v[k];
        }
        gv = gradient(v);

        ReconRecord rec;
        rec.iteration = it;
        rec.inner = corr.stats;
        rec.terms.tv = weighted_tv(v, a);
        rec.rel_sigma_change = norm > 0.0 ? std::sqrt(change / norm) : std::sqrt(change);
        if (ground_truth) {
            rec.rel_l2_error = rel_l2_error(sigma_from_potential(a, v, config.grad_floor), *ground_truth);
        }
        if (!out.report.records.empty()) rec.non_monotone = rec.terms.tv > out.report.records.back().terms.tv;
        out.report.records.push_back(rec);
        if (rec.rel_sigma_change <= config.tol) {
            out.report.converged = true;
            break;
        }
    }
    return out;
}

} // namespace lgr

#endif
