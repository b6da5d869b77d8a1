#ifndef LGR_ELECTRODES_HPP
#define LGR_ELECTRODES_HPP

#include <lgr/error.hpp>
#include <lgr/grid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace lgr {

// Two equal electrodes centered on the top and bottom sides.
struct ElectrodeSet {
    double aperture = 1.0;  // fraction of the side covered, in (0, 1]
    double z = 1.0;         // contact impedance
    double current = 1.0;   // injected current I
    bool top_positive = true;  // top electrode injects +I

    void validate() const {
        require(aperture > 0.0 && aperture <= 1.0, Error::Kind::invalid_argument,
                "electrode aperture must lie in (0, 1], got " + std::to_string(aperture));
        require(z > 0.0, Error::Kind::invalid_argument, "contact impedance z must be positive");
        require(current > 0.0, Error::Kind::invalid_argument, "current I must be positive");
    }

    // Arc-length intervals (counterclockwise from (0,0), perimeter 4) covered
    // by the bottom and top electrodes.
    std::array<double, 2> bottom_interval() const {
        const double lo = 0.5 * (1.0 - aperture);
        return {lo, lo + aperture};
    }
    std::array<double, 2> top_interval() const {
        const auto [lo, hi] = bottom_interval();
        return {3.0 - hi, 3.0 - lo};
    }

    double polarity_top() const { return top_positive ? 1.0 : -1.0; }
};

// Robin data b (1/(Ohm m^2)) and c (A/m^2) at the boundary nodes.
struct RobinCoefficients {
    BoundaryValues b;
    BoundaryValues c;
    double epsilon = 0.0;
    double transition_width = 0.0;
};

namespace detail {

// Length of [lo, hi] intersected with [a, b] on the circle of circumference 4.
inline double periodic_overlap(double lo, double hi, double a, double b) {
    double total = 0.0;
    for (double shift : {-4.0, 0.0, 4.0}) {
        const double l = std::max(lo + shift, a);
        const double r = std::min(hi + shift, b);
        if (r > l) total += r - l;
    }
    return total;
}

// Distance from arc position s to the interval [a, b] along the boundary.
inline double periodic_distance(double s, double a, double b) {
    double best = 4.0;
    for (double shift : {-4.0, 0.0, 4.0}) {
        const double t = s + shift;
        const double d = t < a ? a - t : (t > b ? t - b : 0.0);
        best = std::min(best, d);
    }
    return best;
}

} // namespace detail

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 on [0, 1], clamped outside.
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

// Fraction of each node's boundary dual interval [s - h/2, s + h/2] covered by
// the electrode. Interior electrode nodes get 1, nodes sitting exactly on an
// electrode end (including the corners under a full aperture) get 1/2.
inline BoundaryValues electrode_coverage(const ElectrodeSet& e, const Grid& grid, bool top) {
    const auto iv = top ? e.top_interval() : e.bottom_interval();
    const double h = grid.h();
    BoundaryValues out(grid);
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        const double s = grid.arc_length(k);
        const double f = detail::periodic_overlap(s - 0.5 * h, s + 0.5 * h, iv[0], iv[1]) / h;
        // Arc positions carry roundoff; keep full, half and empty coverage exact.
        const double half_steps = std::round(2.0 * f);
        out[k] = std::abs(2.0 * f - half_steps) < 1e-9 ? 0.5 * half_steps : f;
    }
    return out;
}

inline RobinCoefficients base_coefficients(const ElectrodeSet& e, const Grid& grid) {
    e.validate();
    const BoundaryValues top = electrode_coverage(e, grid, true);
    const BoundaryValues bottom = electrode_coverage(e, grid, false);
    const double pol = e.polarity_top();
    RobinCoefficients rc{BoundaryValues(grid), BoundaryValues(grid), 0.0, 0.0};
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        rc.b[k] = (top[k] + bottom[k]) / e.z;
        rc.c[k] = pol * e.current * (top[k] - bottom[k]);
    }
    return rc;
}

// C^2 glued coefficients: plateau 1/z and +-I on the electrodes, floor
// epsilon/z and 0 at arc distance >= w from both, smoothstep in between.
inline RobinCoefficients smoothed_coefficients(const ElectrodeSet& e, const Grid& grid,
                                               double epsilon, double w) {
    e.validate();
    require(epsilon > 0.0 && epsilon <= 1.0, Error::Kind::invalid_argument,
            "epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    require(w >= 2.0 * grid.h() * (1.0 - 1e-12), Error::Kind::invalid_argument,
            "smoothing width " + std::to_string(w) + " is below 2h = " +
                std::to_string(2.0 * grid.h()) + "; transition cannot be resolved");
    const auto top = e.top_interval();
    const auto bottom = e.bottom_interval();
    const double pol = e.polarity_top();
    const auto profile = [w](double d) {
        if (d <= 0.0) return 1.0;
        if (d >= w) return 0.0;
        return 1.0 - smoothstep5(d / w);
    };
    RobinCoefficients rc{BoundaryValues(grid), BoundaryValues(grid), epsilon, w};
    for (std::size_t k = 0; k < grid.boundary_count(); ++k) {
        const double s = grid.arc_length(k);
        const double pt = profile(detail::periodic_distance(s, top[0], top[1]));
        const double pb = profile(detail::periodic_distance(s, bottom[0], bottom[1]));
        const double p = std::max(pt, pb);
        if (p == 1.0) {
            rc.b[k] = 1.0 / e.z;
        } else if (p == 0.0) {
            rc.b[k] = epsilon / e.z;
        } else {
            rc.b[k] = (epsilon + (1.0 - epsilon) * p) / e.z;
        }
        rc.c[k] = pol * e.current * (pt - pb);
    }
    return rc;
}

inline double default_transition_width(const Grid& grid) { return 4.0 * grid.h(); }

// Integral of u over the positive (sign = +1) or negative electrode.
inline double electrode_integral(const BoundaryValues& trace, const ElectrodeSet& e, double sign) {
    const Grid& g = trace.grid();
    const bool top = (sign > 0.0) == e.top_positive;
    const BoundaryValues cover = electrode_coverage(e, g, top);
    double s = 0.0;
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        s += boundary_weight(g, k) * cover[k] * trace[k];
    }
    return s;
}

// |e| under the boundary quadrature.
inline double electrode_length(const ElectrodeSet& e, const Grid& grid) {
    return electrode_integral(BoundaryValues(grid, 1.0), e, 1.0);
}

} // namespace lgr

#endif
