#ifndef LGR_GRID_HPP
#define LGR_GRID_HPP

#include <lgr/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lgr {

// Uniform node-centered grid on the unit square. Node (i, j) sits at
// (i / (n-1), j / (n-1)); i runs along x, j along y.
class Grid {
public:
    explicit Grid(std::size_t n) : n_(n) {
        require(n >= 3, Error::Kind::invalid_grid,
                "grid needs at least 3 nodes per side, got " + std::to_string(n));
    }

    std::size_t n() const noexcept { return n_; }
    double h() const noexcept { return 1.0 / static_cast<double>(n_ - 1); }
    std::size_t node_count() const noexcept { return n_ * n_; }
    std::size_t cell_count() const noexcept { return (n_ - 1) * (n_ - 1); }
    std::size_t boundary_count() const noexcept { return 4 * (n_ - 1); }

    // Coordinates are i / (n-1) so the last node lands on 1 exactly.
    double coord(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(n_ - 1);
    }

    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * n_ + i; }
    std::size_t cell_index(std::size_t i, std::size_t j) const noexcept {
        return j * (n_ - 1) + i;
    }

    bool is_boundary(std::size_t i, std::size_t j) const noexcept {
        return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
    }

    // Counterclockwise boundary walk starting at (0,0): bottom, right, top,
    // left, each side contributing n-1 nodes.
    std::pair<std::size_t, std::size_t> boundary_node(std::size_t k) const noexcept {
        const std::size_t m = n_ - 1;
        const std::size_t side = k / m;
        const std::size_t r = k % m;
        switch (side) {
        case 0: return {r, 0};
        case 1: return {m, r};
        case 2: return {m - r, m};
        default: return {0, m - r};
        }
    }

    std::size_t boundary_position(std::size_t i, std::size_t j) const noexcept {
        const std::size_t m = n_ - 1;
        if (j == 0) return i;
        if (i == m) return m + j;
        if (j == m) return 2 * m + (m - i);
        return 3 * m + (m - j);
    }

    // Arc length along the boundary, measured counterclockwise from (0,0);
    // the perimeter is 4.
    double arc_length(std::size_t k) const noexcept { return static_cast<double>(k) * h(); }

    // Boundary index of the node's mirror image under y -> 1 - y.
    std::size_t mirror_y(std::size_t k) const noexcept {
        auto [i, j] = boundary_node(k);
        return boundary_position(i, n_ - 1 - j);
    }

    bool operator==(const Grid& other) const noexcept { return n_ == other.n_; }

private:
    std::size_t n_;
};

inline Grid make_grid(std::size_t n) { return Grid(n); }

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    require(a == b, Error::Kind::dimension,
            std::string(what) + ": grid mismatch (" + std::to_string(a.n()) + " vs " +
                std::to_string(b.n()) + ")");
}

// One value per node, row-major with j outer and i inner.
class ScalarField {
public:
    explicit ScalarField(Grid grid, double fill = 0.0)
        : grid_(grid), values_(grid.node_count(), fill) {}

    ScalarField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.node_count(), Error::Kind::dimension,
                "scalar field needs " + std::to_string(grid_.node_count()) + " values, got " +
                    std::to_string(values_.size()));
    }

    template <class F>
    static ScalarField from_function(Grid grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t j = 0; j < grid.n(); ++j) {
            for (std::size_t i = 0; i < grid.n(); ++i) {
                out(i, j) = f(grid.coord(i), grid.coord(j));
            }
        }
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& data() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    bool operator==(const ScalarField& other) const {
        return grid_ == other.grid_ && values_ == other.values_;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

// Cell-centered vector field; cell (i, j) spans [x_i, x_{i+1}] x [y_j, y_{j+1}].
struct VectorField {
    explicit VectorField(Grid g) : grid(g), x(g.cell_count(), 0.0), y(g.cell_count(), 0.0) {}

    double magnitude(std::size_t c) const { return std::hypot(x[c], y[c]); }

    Grid grid;
    std::vector<double> x;
    std::vector<double> y;
};

// Values at the 4(n-1) boundary nodes in counterclockwise order from (0,0).
class BoundaryValues {
public:
    explicit BoundaryValues(Grid grid, double fill = 0.0)
        : grid_(grid), values_(grid.boundary_count(), fill) {}

    BoundaryValues(Grid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.boundary_count(), Error::Kind::dimension,
                "boundary values need " + std::to_string(grid_.boundary_count()) +
                    " entries, got " + std::to_string(values_.size()));
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

private:
    Grid grid_;
    std::vector<double> values_;
};

// Boundary quadrature weight of every boundary node. The boundary is a closed
// polygon of four segments, each integrated by the trapezoidal rule; a corner
// is the end of two segments and collects h/2 from each.
inline double boundary_weight(const Grid& grid, std::size_t /*k*/) { return grid.h(); }

inline double boundary_integral(const BoundaryValues& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        s += boundary_weight(f.grid(), k) * f[k];
    }
    return s;
}

inline VectorField gradient(const ScalarField& u) {
    const Grid& g = u.grid();
    const std::size_t m = g.n() - 1;
    const double inv2h = 0.5 / g.h();
    VectorField out(g);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            const double u00 = u(i, j), u10 = u(i + 1, j);
            const double u01 = u(i, j + 1), u11 = u(i + 1, j + 1);
            const std::size_t c = g.cell_index(i, j);
            out.x[c] = ((u10 - u00) + (u11 - u01)) * inv2h;
            out.y[c] = ((u01 - u00) + (u11 - u10)) * inv2h;
        }
    }
    return out;
}

// Negative transpose of gradient(): for every v and F,
// <gradient(v), F>_cells = -<v, divergence(F)>_nodes.
inline ScalarField divergence(const VectorField& f) {
    const Grid& g = f.grid;
    const std::size_t m = g.n() - 1;
    const double inv2h = 0.5 / g.h();
    ScalarField out(g);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t c = g.cell_index(i, j);
            const double fx = f.x[c] * inv2h;
            const double fy = f.y[c] * inv2h;
            out(i, j) += fx + fy;
            out(i + 1, j) += -fx + fy;
            out(i, j + 1) += fx - fy;
            out(i + 1, j + 1) += -fx - fy;
        }
    }
    return out;
}

// Arithmetic mean of the four corner values of every cell.
inline std::vector<double> cell_means(const ScalarField& a) {
    const Grid& g = a.grid();
    const std::size_t m = g.n() - 1;
    std::vector<double> out(g.cell_count());
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            out[g.cell_index(i, j)] =
                0.25 * (a(i, j) + a(i + 1, j) + a(i, j + 1) + a(i + 1, j + 1));
        }
    }
    return out;
}

// Each node takes the mean of the cell values of its adjacent cells.
inline ScalarField cells_to_nodes(const Grid& g, std::span<const double> cell_values) {
    require(cell_values.size() == g.cell_count(), Error::Kind::dimension,
            "cells_to_nodes: expected one value per cell");
    const std::size_t m = g.n() - 1;
    ScalarField sum(g);
    ScalarField count(g);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            const double v = cell_values[g.cell_index(i, j)];
            for (auto [di, dj] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
                sum(i + di, j + dj) += v;
                count(i + di, j + dj) += 1.0;
            }
        }
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
        sum[k] /= count[k];
    }
    return sum;
}

// Nodal |grad u|: cell gradient magnitudes averaged back to the nodes.
inline ScalarField nodal_gradient_magnitude(const ScalarField& u) {
    const VectorField gu = gradient(u);
    std::vector<double> mag(gu.x.size());
    for (std::size_t c = 0; c < mag.size(); ++c) {
        mag[c] = gu.magnitude(c);
    }
    return cells_to_nodes(u.grid(), mag);
}

inline double weighted_tv(const ScalarField& v, const ScalarField& a) {
    require_same_grid(v.grid(), a.grid(), "weighted_tv");
    const VectorField gv = gradient(v);
    const std::vector<double> abar = cell_means(a);
    const double area = v.grid().h() * v.grid().h();
    double s = 0.0;
    for (std::size_t c = 0; c < abar.size(); ++c) {
        s += abar[c] * gv.magnitude(c);
    }
    return s * area;
}

// Sum over cells of |grad v|^2 h^2.
inline double dirichlet_energy(const ScalarField& v) {
    const VectorField gv = gradient(v);
    double s = 0.0;
    for (std::size_t c = 0; c < gv.x.size(); ++c) {
        s += gv.x[c] * gv.x[c] + gv.y[c] * gv.y[c];
    }
    return s * v.grid().h() * v.grid().h();
}

inline double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// ||f - g|| / ||g||; +inf when g vanishes but f does not.
inline double rel_l2_error(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid(), g.grid(), "rel_l2_error");
    double diff = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double d = f[k] - g[k];
        diff += d * d;
        ref += g[k] * g[k];
    }
    if (ref == 0.0) {
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(diff / ref);
}

inline BoundaryValues boundary_trace(const ScalarField& u) {
    const Grid& g = u.grid();
    BoundaryValues out(g);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        out[k] = u(i, j);
    }
    return out;
}

} // namespace lgr

#endif
