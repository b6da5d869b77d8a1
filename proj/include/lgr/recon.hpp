#ifndef LGR_RECON_HPP
#define LGR_RECON_HPP

#include <lgr/assembly.hpp>
#include <lgr/electrodes.hpp>
#include <lgr/forward.hpp>
#include <lgr/grid.hpp>
#include <lgr/harmonic_lift.hpp>
#include <lgr/pcg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lgr {

// ---------------------------------------------------------------------------
// Functionals

// Terms of G^delta(v; a) = int a|grad v| + 1/2 int_bdry b (v - h)^2
//                          + delta/2 int |grad(v - h)|^2.
struct FunctionalTerms {
    double tv = 0.0;
    double boundary = 0.0;
    double delta_term = 0.0;

    double G() const { return tv + boundary; }
    double G_delta() const { return tv + boundary + delta_term; }
};

inline double boundary_penalty(const ScalarField& v, const RobinCoefficients& coeffs,
                               const ScalarField& h) {
    const Grid& g = v.grid();
    double s = 0.0;
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        const double d = v(i, j) - h(i, j);
        s += boundary_weight(g, k) * coeffs.b[k] * d * d;
    }
    return 0.5 * s;
}

inline FunctionalTerms functional_terms(const ScalarField& v, const ScalarField& a,
                                        const RobinCoefficients& coeffs, const ScalarField& h,
                                        double delta) {
    require_same_grid(v.grid(), a.grid(), "functional");
    require_same_grid(v.grid(), h.grid(), "functional");
    require_same_grid(v.grid(), coeffs.b.grid(), "functional");
    require(delta >= 0.0, Error::Kind::invalid_argument, "delta must be nonnegative");
    FunctionalTerms t;
    t.tv = weighted_tv(v, a);
    t.boundary = boundary_penalty(v, coeffs, h);
    if (delta > 0.0) {
        ScalarField diff = v;
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= h[k];
        t.delta_term = 0.5 * delta * dirichlet_energy(diff);
    }
    return t;
}

inline double functional_G(const ScalarField& v, const ScalarField& a,
                           const RobinCoefficients& coeffs, const ScalarField& h) {
    return functional_terms(v, a, coeffs, h, 0.0).G();
}

inline double functional_Gdelta(const ScalarField& v, const ScalarField& a,
                                const RobinCoefficients& coeffs, const ScalarField& h,
                                double delta) {
    return functional_terms(v, a, coeffs, h, delta).G_delta();
}

// ---------------------------------------------------------------------------
// Conductivity update

// Absolute gradient floor: grad_floor * max|grad v|, or grad_floor itself
// when v is constant.
inline double gradient_floor(const ScalarField& grad_mag, double grad_floor) {
    const double m = grad_mag.max();
    return m > 0.0 ? grad_floor * m : grad_floor;
}

// sigma = a / max(|grad v|, floor) at the nodes. floored_nodes, when given,
// receives the number of nodes where the floor was active.
inline ScalarField sigma_from_potential(const ScalarField& a, const ScalarField& v,
                                        double grad_floor, std::size_t* floored_nodes = nullptr) {
    require_same_grid(a.grid(), v.grid(), "sigma_from_potential");
    require(grad_floor > 0.0, Error::Kind::invalid_argument, "grad_floor must be positive");
    const ScalarField mag = nodal_gradient_magnitude(v);
    const double floor = gradient_floor(mag, grad_floor);
    ScalarField sigma(a.grid());
    std::size_t count = 0;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        double g = mag[k];
        if (g < floor) {
            g = floor;
            ++count;
        }
        sigma[k] = a[k] / g;
    }
    if (floored_nodes) *floored_nodes = count;
    return sigma;
}

// ---------------------------------------------------------------------------
// Reconstruction

enum class RhsMode {
    // (sigma + delta) du/dn + b u = c + delta dh/dn: natural boundary condition
    // of G^delta.
    variational,
    // (sigma + delta) du/dn + b u = delta dh/dn, without the c term.
    lift_flux,
};

inline const char* to_string(RhsMode m) { return m == RhsMode::variational ? "variational" : "lift-flux"; }

inline RhsMode parse_rhs_mode(const std::string& s) {
    if (s == "variational") return RhsMode::variational;
    if (s == "lift-flux") return RhsMode::lift_flux;
    throw Error(Error::Kind::invalid_argument, "unknown rhs mode '" + s + "'");
}

enum class StopRule { sigma_change, functional_change };

inline StopRule parse_stop_rule(const std::string& s) {
    if (s == "sigma") return StopRule::sigma_change;
    if (s == "functional") return StopRule::functional_change;
    throw Error(Error::Kind::invalid_argument, "unknown stop rule '" + s + "'");
}

struct ReconConfig {
    double epsilon = 5e-4;
    double delta = 3e-3;
    std::size_t max_outer_iterations = 200;
    double stop_tol = 1e-6;
    double grad_floor = 1e-8;
    std::optional<std::pair<double, double>> sigma_bounds;
    RhsMode rhs_mode = RhsMode::variational;
    StopRule stop_rule = StopRule::sigma_change;
    double initial_sigma = 1.0;
    // Overrides initial_sigma when set.
    std::optional<ScalarField> initial_field;
    // Defaults to 4h.
    std::optional<double> transition_width;
    double inner_tol = 1e-10;
    std::optional<std::size_t> inner_max_iter;
    Preconditioner preconditioner = Preconditioner::jacobi;

    void validate() const {
        require(epsilon > 0.0 && epsilon <= 1.0, Error::Kind::invalid_argument, "epsilon must lie in (0, 1]");
        require(delta > 0.0, Error::Kind::invalid_argument, "delta must be positive");
        require(grad_floor > 0.0, Error::Kind::invalid_argument, "grad_floor must be positive");
        require(stop_tol >= 0.0, Error::Kind::invalid_argument, "stop_tol must be nonnegative");
        require(max_outer_iterations >= 1, Error::Kind::invalid_argument, "max_outer_iterations must be at least 1");
        require(initial_sigma > 0.0, Error::Kind::invalid_argument, "initial sigma must be positive");
        require(inner_tol > 0.0 && inner_tol < 1.0, Error::Kind::invalid_argument, "inner_tol must lie in (0, 1)");
        if (sigma_bounds) {
            require(sigma_bounds->first > 0.0 && sigma_bounds->first <= sigma_bounds->second,
                    Error::Kind::invalid_argument, "sigma bounds need 0 < sigma_min <= sigma_max");
        }
    }
};

struct ReconRecord {
    std::size_t iteration = 0;
    FunctionalTerms terms;
    double rel_sigma_change = 0.0;
    double rel_l2_error = std::numeric_limits<double>::quiet_NaN();
    SolveStats inner;
    std::size_t floored_nodes = 0;
    bool non_monotone = false;  // G^delta went up from the previous iteration
};

struct ReconReport {
    std::vector<ReconRecord> records;
    bool converged = false;

    std::size_t iterations() const { return records.size(); }
};

struct ReconResult {
    ScalarField sigma;
    ScalarField u;
    ReconReport report;
};

inline const char* recon_csv_header() {
    return "iteration,G_delta,G,tv_term,boundary_term,delta_term,rel_sigma_change,rel_l2_error,"
           "inner_iterations,inner_residual,floored_nodes,non_monotone";
}

inline void write_report_csv(std::ostream& os, const ReconReport& report) {
    os << recon_csv_header() << '\n';
    os.precision(17);
    for (const ReconRecord& r : report.records) {
        os << r.iteration << ',' << r.terms.G_delta() << ',' << r.terms.G() << ',' << r.terms.tv << ','
           << r.terms.boundary << ',' << r.terms.delta_term << ',' << r.rel_sigma_change << ',';
        if (!std::isnan(r.rel_l2_error)) os << r.rel_l2_error;
        os << ',' << r.inner.iterations << ',' << r.inner.relative_residual << ',' << r.floored_nodes
           << ',' << (r.non_monotone ? 1 : 0) << '\n';
    }
}

// Everything the fixed-point iteration keeps constant: smoothed coefficients,
// the harmonic lift and the boundary data of the linearized problem.
struct ReconSetup {
    RobinCoefficients coeffs;
    HarmonicLift lift;
    RobinCoefficients solve_coeffs;  // c zeroed in lift_flux mode
    BoundaryValues flux_rhs;         // delta dh/dn
};

inline ReconSetup prepare_reconstruction(const ElectrodeSet& electrodes, const ReconConfig& config,
                                         const Grid& grid) {
    const double w = config.transition_width.value_or(default_transition_width(grid));
    RobinCoefficients coeffs = smoothed_coefficients(electrodes, grid, config.epsilon, w);
    SolveOptions opt = default_solve_options(grid);
    opt.tol = config.inner_tol;
    opt.preconditioner = config.preconditioner;
    if (config.inner_max_iter) opt.max_iter = *config.inner_max_iter;
    HarmonicLift lift = harmonic_lift(coeffs, grid, opt);
    RobinCoefficients solve_coeffs = coeffs;
    if (config.rhs_mode == RhsMode::lift_flux) {
        solve_coeffs.c = BoundaryValues(grid);
    }
    BoundaryValues flux(grid);
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        flux[k] = config.delta * lift.dh_dn[k];
    }
    return ReconSetup{std::move(coeffs), std::move(lift), std::move(solve_coeffs), std::move(flux)};
}

// The linearized problem for a frozen conductivity: div((sigma + delta) grad u) = 0
// with (sigma + delta) du/dn + b u = [c] + delta dh/dn.
inline SparseSystem assemble_linearized(const ScalarField& sigma, const ReconSetup& setup,
                                        double delta) {
    ScalarField eff = sigma;
    for (std::size_t k = 0; k < eff.size(); ++k) eff[k] += delta;
    return assemble_robin(eff, setup.solve_coeffs, setup.flux_rhs, sigma.grid());
}

inline void project_bounds(ScalarField& sigma, const std::optional<std::pair<double, double>>& bounds) {
    if (!bounds) return;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        sigma[k] = std::clamp(sigma[k], bounds->first, bounds->second);
    }
}

// Fixed-point iteration: solve the linearized problem with the current
// conductivity, then update sigma = a / |grad u|. Returns the last
// conductivity together with the potential solved from it, so the pair is a
// discrete critical point of the frozen-weight problem.
inline ReconResult reconstruct(const ScalarField& a, const ElectrodeSet& electrodes,
                               const ReconConfig& config, const Grid& grid,
                               const std::optional<ScalarField>& ground_truth = std::nullopt) {
    config.validate();
    electrodes.validate();
    require_same_grid(a.grid(), grid, "reconstruct");
    require(a.all_finite() && a.min() >= 0.0, Error::Kind::invalid_argument,
            "reconstruct: interior data must be finite and nonnegative");
    require(a.max() > 0.0, Error::Kind::degenerate, "reconstruct: interior data vanish identically");
    if (ground_truth) require_same_grid(ground_truth->grid(), grid, "reconstruct");

    const ReconSetup setup = prepare_reconstruction(electrodes, config, grid);

    SolveOptions opt = default_solve_options(grid);
    opt.tol = config.inner_tol;
    opt.preconditioner = config.preconditioner;
    if (config.inner_max_iter) opt.max_iter = *config.inner_max_iter;

    ScalarField sigma = config.initial_field ? *config.initial_field : ScalarField(grid, config.initial_sigma);
    require_same_grid(sigma.grid(), grid, "reconstruct: initial field");
    project_bounds(sigma, config.sigma_bounds);

    ReconResult out{sigma, ScalarField(grid), {}};
    std::vector<double> warm;
    for (std::size_t it = 0; it < config.max_outer_iterations; ++it) {
        const SparseSystem sys = assemble_linearized(sigma, setup, config.delta);
        if (!warm.empty()) opt.initial_guess = std::span<const double>(warm);
        SolveResult res = pcg_solve(sys, opt);
        if (!res.stats.converged) {
            throw Error(Error::Kind::solver,
                        "reconstruct: inner solve failed at outer iteration " + std::to_string(it) +
                            " (relative residual " + std::to_string(res.stats.relative_residual) + ")");
        }
        warm = res.x;
        ScalarField u(grid, std::move(res.x));

        ReconRecord rec;
        rec.iteration = it;
        rec.inner = res.stats;
        rec.terms = functional_terms(u, a, setup.coeffs, setup.lift.h, config.delta);
        if (ground_truth) rec.rel_l2_error = rel_l2_error(sigma, *ground_truth);
        if (!out.report.records.empty()) {
            rec.non_monotone = rec.terms.G_delta() > out.report.records.back().terms.G_delta();
        }

        ScalarField next = sigma_from_potential(a, u, config.grad_floor, &rec.floored_nodes);
        project_bounds(next, config.sigma_bounds);
        rec.rel_sigma_change = rel_l2_error(next, sigma);

        bool stop = false;
        if (config.stop_rule == StopRule::sigma_change) {
            stop = rec.rel_sigma_change <= config.stop_tol;
        } else if (!out.report.records.empty()) {
            const double prev = out.report.records.back().terms.G_delta();
            stop = std::abs(rec.terms.G_delta() - prev) <= config.stop_tol * std::abs(prev);
        }
        out.report.records.push_back(rec);
        out.sigma = sigma;
        out.u = std::move(u);
        sigma = std::move(next);
        if (stop) {
            out.report.converged = true;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schedule study: delta_n -> 0 with data perturbations eta_n.

struct Schedule {
    std::vector<double> deltas;
    std::vector<double> etas;
    std::uint64_t seed = 1;
    // The tail is Cauchy when the spread of the last three values is at most
    // cauchy_fraction times that of the first three (fewer for short schedules).
    double cauchy_fraction = 0.1;

    static Schedule geometric(double delta0, std::size_t n_max, std::uint64_t seed = 1) {
        Schedule s;
        s.seed = seed;
        for (std::size_t k = 0; k <= n_max; ++k) {
            const double d = delta0 * std::ldexp(1.0, -static_cast<int>(k));
            s.deltas.push_back(d);
            s.etas.push_back(d);
        }
        return s;
    }

    // delta_n strictly decreasing and positive, eta_n >= 0, and eta_n^2/delta_n
    // strictly decreasing (or identically zero).
    void validate() const {
        require(!deltas.empty() && deltas.size() == etas.size(), Error::Kind::invalid_argument,
                "schedule: deltas and etas must be nonempty and of equal length");
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            require(deltas[k] > 0.0, Error::Kind::invalid_argument, "schedule: delta_n must be positive");
            require(etas[k] >= 0.0, Error::Kind::invalid_argument, "schedule: eta_n must be nonnegative");
            if (k == 0) continue;
            require(deltas[k] < deltas[k - 1], Error::Kind::invalid_argument,
                    "schedule: delta_n must be strictly decreasing");
            const double prev = etas[k - 1] * etas[k - 1] / deltas[k - 1];
            const double cur = etas[k] * etas[k] / deltas[k];
            require(cur < prev || (cur == 0.0 && prev == 0.0), Error::Kind::invalid_argument,
                    "schedule: eta_n^2/delta_n must decrease toward 0 (step " + std::to_string(k) +
                        ": " + std::to_string(prev) + " -> " + std::to_string(cur) + ")");
        }
    }
};

struct StudyEntry {
    double delta = 0.0;
    double eta = 0.0;
    double G_delta_noisy = 0.0;  // G^{delta_n}(u_n; a_n)
    double G_clean = 0.0;        // G(u_n; a)
    double sigma_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t outer_iterations = 0;
};

struct ScheduleStudy {
    std::vector<StudyEntry> entries;
    bool cauchy_tail = false;
    double head_spread = 0.0;
    double tail_spread = 0.0;
};

inline double spread(const std::vector<double>& v, std::size_t first, std::size_t count) {
    const auto b = v.begin() + static_cast<std::ptrdiff_t>(first);
    const auto [lo, hi] = std::minmax_element(b, b + static_cast<std::ptrdiff_t>(count));
    return *hi - *lo;
}

inline ScheduleStudy convergence_study(const ScalarField& a_clean, const ElectrodeSet& electrodes,
                                       const Grid& grid, const Schedule& schedule,
                                       const ReconConfig& base,
                                       const std::optional<ScalarField>& ground_truth = std::nullopt) {
    schedule.validate();
    ScheduleStudy study;
    std::vector<double> g_values;
    for (std::size_t k = 0; k < schedule.deltas.size(); ++k) {
        ReconConfig cfg = base;
        cfg.delta = schedule.deltas[k];
        const ScalarField a_n = add_noise(a_clean, schedule.etas[k], schedule.seed + k);
        const ReconResult res = reconstruct(a_n, electrodes, cfg, grid);
        const ReconSetup setup = prepare_reconstruction(electrodes, cfg, grid);

        StudyEntry e;
        e.delta = cfg.delta;
        e.eta = schedule.etas[k];
        e.G_delta_noisy = functional_Gdelta(res.u, a_n, setup.coeffs, setup.lift.h, cfg.delta);
        e.G_clean = functional_G(res.u, a_clean, setup.coeffs, setup.lift.h);
        if (ground_truth) e.sigma_error = rel_l2_error(res.sigma, *ground_truth);
        e.outer_iterations = res.report.iterations();
        study.entries.push_back(e);
        g_values.push_back(e.G_clean);
    }
    const std::size_t third = std::clamp<std::size_t>(g_values.size() / 2, 1, 3);
    study.head_spread = spread(g_values, 0, third);
    study.tail_spread = spread(g_values, g_values.size() - third, third);
    study.cauchy_tail = study.tail_spread <= schedule.cauchy_fraction * study.head_spread;
    return study;
}

} // namespace lgr

#endif
