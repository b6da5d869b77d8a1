#ifndef LGR_FORWARD_HPP
#define LGR_FORWARD_HPP

#include <lgr/assembly.hpp>
#include <lgr/electrodes.hpp>
#include <lgr/grid.hpp>
#include <lgr/harmonic_lift.hpp>
#include <lgr/pcg.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace lgr {

struct ForwardResult {
    ScalarField u;
    ScalarField a;
    std::optional<double> v_cem;
    std::optional<double> lambda;
    SolveStats stats;
};

// |sigma grad u|: cell gradient magnitude times the cell-mean conductivity,
// averaged back to the nodes.
inline ScalarField interior_data(const ScalarField& sigma, const ScalarField& u) {
    require_same_grid(sigma.grid(), u.grid(), "interior_data");
    const VectorField gu = gradient(u);
    const std::vector<double> sbar = cell_means(sigma);
    std::vector<double> cell(sbar.size());
    for (std::size_t c = 0; c < cell.size(); ++c) {
        cell[c] = std::abs(sbar[c]) * gu.magnitude(c);
    }
    return cells_to_nodes(u.grid(), cell);
}

namespace detail {

inline void require_converged(const SolveStats& st, const char* who) {
    if (!st.converged) {
        throw Error(Error::Kind::solver, std::string(who) + ": linear solve stopped after " +
                                             std::to_string(st.iterations) +
                                             " iterations at relative residual " +
                                             std::to_string(st.relative_residual));
    }
}

} // namespace detail

inline ForwardResult solve_forward(const ScalarField& sigma, const RobinCoefficients& coeffs,
                                   const Grid& grid, const SolveOptions& opt) {
    const SparseSystem sys = assemble_robin(sigma, coeffs, grid);
    SolveResult res = pcg_solve(sys, opt);
    detail::require_converged(res.stats, "solve_forward");
    ScalarField u(grid, std::move(res.x));
    ScalarField a = interior_data(sigma, u);
    return ForwardResult{std::move(u), std::move(a), std::nullopt, std::nullopt, res.stats};
}

inline ForwardResult solve_forward(const ScalarField& sigma, const RobinCoefficients& coeffs,
                                   const Grid& grid) {
    return solve_forward(sigma, coeffs, grid, default_solve_options(grid));
}

inline ForwardResult solve_cem_forward(const ScalarField& sigma, const ElectrodeSet& electrodes,
                                       const Grid& grid, const SolveOptions& opt) {
    const SparseSystem sys = assemble_cem(sigma, electrodes, grid);
    SolveResult res = pcg_solve(sys, opt);
    detail::require_converged(res.stats, "solve_cem_forward");
    const double v = res.x.back();
    res.x.pop_back();
    ScalarField u(grid, std::move(res.x));
    ScalarField a = interior_data(sigma, u);
    return ForwardResult{std::move(u), std::move(a), v, std::nullopt, res.stats};
}

inline ForwardResult solve_cem_forward(const ScalarField& sigma, const ElectrodeSet& electrodes,
                                       const Grid& grid) {
    return solve_cem_forward(sigma, electrodes, grid, default_solve_options(grid));
}

// int_{e+} sigma dv/dn ds of a CEM solution, from v + z sigma dv/dn = V.
inline double cem_electrode_current(const ForwardResult& cem, const ElectrodeSet& electrodes) {
    require(cem.v_cem.has_value(), Error::Kind::invalid_argument,
            "cem_electrode_current needs a CEM forward result");
    const BoundaryValues trace = boundary_trace(cem.u);
    const double len = electrode_length(electrodes, trace.grid());
    return (*cem.v_cem * len - electrode_integral(trace, electrodes, 1.0)) / electrodes.z;
}

struct CemScaling {
    double lambda;
    double inv_from_positive;  // |e| - (1/zI) int_{e+} u0 ds
    double inv_from_negative;  // |e| + (1/zI) int_{e-} u0 ds
};

inline CemScaling cem_scaling_detail(const ScalarField& u0, const ElectrodeSet& electrodes) {
    electrodes.validate();
    const BoundaryValues trace = boundary_trace(u0);
    const double len = electrode_length(electrodes, u0.grid());
    const double zi = electrodes.z * electrodes.current;
    const double inv_p = len - electrode_integral(trace, electrodes, 1.0) / zi;
    const double inv_n = len + electrode_integral(trace, electrodes, -1.0) / zi;
    require(std::abs(inv_p) >= 1e-12, Error::Kind::degenerate,
            "cem_scaling: lambda^-1 = " + std::to_string(inv_p) + " is degenerate");
    return CemScaling{1.0 / inv_p, inv_p, inv_n};
}

// Factor lambda with lambda u0 = v for the sharp-coefficient Robin solution u0.
inline double cem_scaling(const ForwardResult& u0, const ElectrodeSet& electrodes) {
    return cem_scaling_detail(u0.u, electrodes).lambda;
}

// a (1 + level xi), xi ~ U[-1, 1] i.i.d. from a seeded mt19937_64, clamped at 0.
inline ScalarField add_noise(const ScalarField& a, double level, std::uint64_t seed) {
    require(level >= 0.0, Error::Kind::invalid_argument, "noise level must be nonnegative");
    ScalarField out = a;
    if (level == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xi(-1.0, 1.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = std::max(0.0, a[k] * (1.0 + level * xi(rng)));
    }
    return out;
}

// phi(t) = t + s w psi((t - center) / w) with the C^1 bump psi(r) = (1 - r^2)^2
// on |r| < 1. phi' = 1 + s psi'(r) >= 1 - 1.54 s, so s < 0.64 keeps phi
// increasing.
struct PhiParams {
    double center = 0.0;
    double half_width = 0.1;
    double amplitude = 0.0;

    double operator()(double t) const {
        const double r = (t - center) / half_width;
        if (std::abs(r) >= 1.0) return t;
        const double q = 1.0 - r * r;
        return t + amplitude * half_width * q * q;
    }

    double derivative(double t) const {
        const double r = (t - center) / half_width;
        if (std::abs(r) >= 1.0) return 1.0;
        return 1.0 - 4.0 * amplitude * r * (1.0 - r * r);
    }
};

// A bump centered in the gap between the electrode potential ranges, covering
// the given fraction of that gap.
inline PhiParams bump_between_electrodes(const ScalarField& u0, const ElectrodeSet& electrodes,
                                         double amplitude, double gap_fraction = 0.8) {
    const Grid& g = u0.grid();
    const BoundaryValues trace = boundary_trace(u0);
    const BoundaryValues pos = electrode_coverage(electrodes, g, electrodes.top_positive);
    const BoundaryValues neg = electrode_coverage(electrodes, g, !electrodes.top_positive);
    double pos_min = INFINITY, pos_max = -INFINITY, neg_min = INFINITY, neg_max = -INFINITY;
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        if (pos[k] > 0.0) { pos_min = std::min(pos_min, trace[k]); pos_max = std::max(pos_max, trace[k]); }
        if (neg[k] > 0.0) { neg_min = std::min(neg_min, trace[k]); neg_max = std::max(neg_max, trace[k]); }
    }
    double lo = 0.0, hi = 0.0;
    if (neg_max < pos_min) { lo = neg_max; hi = pos_min; }
    else if (pos_max < neg_min) { lo = pos_max; hi = neg_min; }
    else {
        throw Error(Error::Kind::invalid_argument,
                    "bump_between_electrodes: electrode potential ranges overlap");
    }
    PhiParams phi;
    phi.center = 0.5 * (lo + hi);
    phi.half_width = 0.5 * gap_fraction * (hi - lo);
    phi.amplitude = amplitude;
    return phi;
}

// sigma / (phi' o u0) and phi o u0: a second conductivity/potential pair with
// the same current density magnitude.
inline std::pair<ScalarField, ScalarField> nonuniqueness_transform(const ScalarField& u0,
                                                                   const ScalarField& sigma,
                                                                   const PhiParams& phi) {
    require_same_grid(u0.grid(), sigma.grid(), "nonuniqueness_transform");
    require(phi.half_width > 0.0, Error::Kind::invalid_argument,
            "nonuniqueness_transform: bump half width must be positive");
    ScalarField sigma_phi(sigma.grid());
    ScalarField u_phi(u0.grid());
    for (std::size_t k = 0; k < u0.size(); ++k) {
        const double d = phi.derivative(u0[k]);
        if (!(d > 0.0)) {
            throw Error(Error::Kind::invalid_argument,
                        "nonuniqueness_transform: phi'(" + std::to_string(u0[k]) + ") = " +
                            std::to_string(d) + " is not positive");
        }
        sigma_phi[k] = sigma[k] / d;
        u_phi[k] = phi(u0[k]);
    }
    return {std::move(sigma_phi), std::move(u_phi)};
}

} // namespace lgr

#endif
