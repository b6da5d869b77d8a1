#ifndef LGR_ASSEMBLY_HPP
#define LGR_ASSEMBLY_HPP

#include <lgr/electrodes.hpp>
#include <lgr/error.hpp>
#include <lgr/grid.hpp>
#include <lgr/sparse.hpp>

#include <cmath>
#include <string>

namespace lgr {

// Discretization: every node owns the dual cell of half-spacing around it
// (half cells on the sides, quarter cells at the corners). Each row is the
// flux balance of that dual cell, so
//   sum_q k_pq (u_p - u_q) + w_p b_p u_p = w_p (c_p + g_p)
// where k_pq is the edge conductance (harmonic mean of the two nodal
// conductivities times the dual face length over h) and w_p the boundary
// quadrature weight. The resulting matrix is symmetric.

namespace detail {

inline void require_positive_conductivity(const ScalarField& sigma, const char* who) {
    const Grid& g = sigma.grid();
    for (std::size_t j = 0; j < g.n(); ++j) {
        for (std::size_t i = 0; i < g.n(); ++i) {
            const double s = sigma(i, j);
            if (!(s > 0.0) || !std::isfinite(s)) {
                throw Error(Error::Kind::assembly,
                            std::string(who) + ": conductivity must be positive and finite, got " +
                                std::to_string(s) + " at node (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
            }
        }
    }
}

inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

// Adds the flux stencil of div(sigma grad u) to the builder.
inline void add_stiffness(MatrixBuilder& mb, const ScalarField& sigma) {
    const Grid& g = sigma.grid();
    const std::size_t n = g.n();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t p = g.index(i, j);
            if (i + 1 < n) {
                // Horizontal edge; its dual face is halved on the bottom/top sides.
                const double face = (j == 0 || j == n - 1) ? 0.5 : 1.0;
                mb.add_edge(p, g.index(i + 1, j), face * harmonic_mean(sigma(i, j), sigma(i + 1, j)));
            }
            if (j + 1 < n) {
                const double face = (i == 0 || i == n - 1) ? 0.5 : 1.0;
                mb.add_edge(p, g.index(i, j + 1), face * harmonic_mean(sigma(i, j), sigma(i, j + 1)));
            }
        }
    }
}

} // namespace detail

// Robin problem div(sigma_eff grad u) = 0, sigma_eff du/dn + b u = c + flux_rhs.
inline SparseSystem assemble_robin(const ScalarField& sigma_eff, const RobinCoefficients& coeffs,
                                   const BoundaryValues& flux_rhs, const Grid& grid) {
    require_same_grid(sigma_eff.grid(), grid, "assemble_robin");
    require_same_grid(coeffs.b.grid(), grid, "assemble_robin");
    require_same_grid(flux_rhs.grid(), grid, "assemble_robin");
    detail::require_positive_conductivity(sigma_eff, "assemble_robin");

    MatrixBuilder mb(grid.node_count());
    detail::add_stiffness(mb, sigma_eff);
    SparseSystem sys;
    sys.rhs.assign(grid.node_count(), 0.0);
    sys.field_unknowns = grid.node_count();
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        auto [i, j] = grid.boundary_node(k);
        const std::size_t p = grid.index(i, j);
        const double w = boundary_weight(grid, k);
        mb.add(p, p, w * coeffs.b[k]);
        sys.rhs[p] += w * (coeffs.c[k] + flux_rhs[k]);
    }
    sys.matrix = mb.build();
    return sys;
}

inline SparseSystem assemble_robin(const ScalarField& sigma_eff, const RobinCoefficients& coeffs,
                                   const Grid& grid) {
    return assemble_robin(sigma_eff, coeffs, BoundaryValues(grid), grid);
}

// Complete electrode model in the unknowns (v, V). Electrode rows carry
// v + z sigma dv/dn = +-V; off-electrode rows are insulating. The extra row is
// the current balance sum_{+-} (1/z) int_{e+-} (V -+ v) ds = 2I, i.e. the e+
// constraint plus the e- constraint, which keeps the bordered matrix
// symmetric; with conservation it is equivalent to int_{e+} sigma dv/dn = I.
inline SparseSystem assemble_cem(const ScalarField& sigma, const ElectrodeSet& electrodes,
                                 const Grid& grid) {
    require_same_grid(sigma.grid(), grid, "assemble_cem");
    detail::require_positive_conductivity(sigma, "assemble_cem");
    electrodes.validate();

    const std::size_t nv = grid.node_count();
    const std::size_t vrow = nv;
    const BoundaryValues pos = electrode_coverage(electrodes, grid, electrodes.top_positive);
    const BoundaryValues neg = electrode_coverage(electrodes, grid, !electrodes.top_positive);

    MatrixBuilder mb(nv + 1);
    detail::add_stiffness(mb, sigma);
    double vdiag = 0.0;
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        auto [i, j] = grid.boundary_node(k);
        const std::size_t p = grid.index(i, j);
        const double w = boundary_weight(grid, k) / electrodes.z;
        const double wp = w * pos[k];
        const double wn = w * neg[k];
        if (wp == 0.0 && wn == 0.0) continue;
        mb.add(p, p, wp + wn);
        mb.add(p, vrow, wn - wp);
        mb.add(vrow, p, wn - wp);
        vdiag += wp + wn;
    }
    mb.add(vrow, vrow, vdiag);

    SparseSystem sys;
    sys.matrix = mb.build();
    sys.rhs.assign(nv + 1, 0.0);
    sys.rhs[vrow] = 2.0 * electrodes.current;
    sys.field_unknowns = nv;
    sys.bordered = true;
    return sys;
}

// 5-point Laplace equation with Dirichlet data. Boundary rows become identity
// rows and their couplings are moved to the right-hand side, so the matrix
// stays symmetric.
inline SparseSystem assemble_laplace_dirichlet(const BoundaryValues& data, const Grid& grid) {
    require_same_grid(data.grid(), grid, "assemble_laplace_dirichlet");
    for (std::size_t k = 0; k < data.size(); ++k) {
        require(std::isfinite(data[k]), Error::Kind::assembly,
                "assemble_laplace_dirichlet: non-finite boundary value at position " + std::to_string(k));
    }
    const std::size_t n = grid.n();
    ScalarField fixed(grid);
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        auto [i, j] = grid.boundary_node(k);
        fixed(i, j) = data[k];
    }

    MatrixBuilder mb(grid.node_count());
    SparseSystem sys;
    sys.rhs.assign(grid.node_count(), 0.0);
    sys.field_unknowns = grid.node_count();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t p = grid.index(i, j);
            if (grid.is_boundary(i, j)) {
                mb.add(p, p, 1.0);
                sys.rhs[p] = fixed(i, j);
                continue;
            }
            mb.add(p, p, 4.0);
            const std::size_t nbr_i[4] = {i - 1, i + 1, i, i};
            const std::size_t nbr_j[4] = {j, j, j - 1, j + 1};
            for (int q = 0; q < 4; ++q) {
                if (grid.is_boundary(nbr_i[q], nbr_j[q])) {
                    sys.rhs[p] += fixed(nbr_i[q], nbr_j[q]);
                } else {
                    mb.add(p, grid.index(nbr_i[q], nbr_j[q]), -1.0);
                }
            }
        }
    }
    sys.matrix = mb.build();
    return sys;
}

inline std::size_t default_max_iterations(const Grid& grid) { return 20 * grid.n(); }

} // namespace lgr

#endif
