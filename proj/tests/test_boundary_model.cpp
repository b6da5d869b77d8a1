#include <lgr/electrodes.hpp>
#include <lgr/harmonic_lift.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace lgr;

namespace {

double sum_ds(const BoundaryValues& f) { return boundary_integral(f); }

bool on_side(const Grid& g, std::size_t k, bool top) {
    auto [i, j] = g.boundary_node(k);
    return top ? j == g.n() - 1 : j == 0;
}

} // namespace

TEST(BaseCoefficients, FullAperture) {
    const Grid g(5);
    const ElectrodeSet e;
    const RobinCoefficients rc = base_coefficients(e, g);
    EXPECT_EQ(rc.epsilon, 0.0);
    EXPECT_EQ(rc.transition_width, 0.0);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        const bool corner = (i == 0 || i == 4) && (j == 0 || j == 4);
        if (corner) {
            // Half of the corner's dual interval lies on the electrode side.
            EXPECT_EQ(rc.b[k], 0.5);
            EXPECT_EQ(rc.c[k], j == 4 ? 0.5 : -0.5);
        } else if (j == 4) {
            EXPECT_EQ(rc.b[k], 1.0);
            EXPECT_EQ(rc.c[k], 1.0);
        } else if (j == 0) {
            EXPECT_EQ(rc.b[k], 1.0);
            EXPECT_EQ(rc.c[k], -1.0);
        } else {
            EXPECT_EQ(rc.b[k], 0.0);
            EXPECT_EQ(rc.c[k], 0.0);
        }
    }
    // Electrode length equals the side length.
    EXPECT_DOUBLE_EQ(electrode_length(e, g), 1.0);
    EXPECT_NEAR(sum_ds(rc.c), 0.0, 1e-15);
}

TEST(BaseCoefficients, ImpedanceScalesB) {
    const Grid g(9);
    ElectrodeSet e;
    e.z = 2.0;
    const RobinCoefficients rc = base_coefficients(e, g);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        if ((j == 0 || j == 8) && i != 0 && i != 8) EXPECT_EQ(rc.b[k], 0.5);
    }
}

TEST(BaseCoefficients, HalfAperture) {
    const Grid g(9);
    ElectrodeSet e;
    e.aperture = 0.5;
    const RobinCoefficients rc = base_coefficients(e, g);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        const bool electrode_side = j == 0 || j == 8;
        const bool middle = i >= 2 && i <= 6;
        if (electrode_side && middle) {
            EXPECT_NE(rc.c[k], 0.0) << "node " << i << "," << j;
            EXPECT_DOUBLE_EQ(std::abs(rc.c[k]), (i == 2 || i == 6) ? 0.5 : 1.0);
        } else {
            EXPECT_EQ(rc.c[k], 0.0) << "node " << i << "," << j;
        }
    }
    EXPECT_NEAR(sum_ds(rc.c), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(electrode_length(e, g), 0.5);
}

TEST(BaseCoefficients, PolarityFlip) {
    const Grid g(9);
    ElectrodeSet e;
    e.top_positive = false;
    const RobinCoefficients rc = base_coefficients(e, g);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        if (on_side(g, k, true)) EXPECT_LE(rc.c[k], 0.0);
        if (on_side(g, k, false)) EXPECT_GE(rc.c[k], 0.0);
    }
}

TEST(ElectrodeSet, Validation) {
    for (double ap : {0.0, -0.1, 1.01}) {
        ElectrodeSet e;
        e.aperture = ap;
        EXPECT_THROW(e.validate(), Error);
    }
    ElectrodeSet z;
    z.z = 0.0;
    EXPECT_THROW(z.validate(), Error);
    ElectrodeSet cur;
    cur.current = 0.0;
    EXPECT_THROW(cur.validate(), Error);
}

TEST(Smoothstep, EndpointsAndDerivatives) {
    EXPECT_EQ(smoothstep5(0.0), 0.0);
    EXPECT_EQ(smoothstep5(1.0), 1.0);
    EXPECT_EQ(smoothstep5(0.5), 0.5);
    const double d = 1e-4;
    for (double t : {0.0, 1.0}) {
        const double first = (smoothstep5(t + d) - smoothstep5(t - d)) / (2 * d);
        const double second = (smoothstep5(t + d) - 2 * smoothstep5(t) + smoothstep5(t - d)) / (d * d);
        EXPECT_NEAR(first, 0.0, 1e-7);
        EXPECT_NEAR(second, 0.0, 1e-3);
    }
    for (double t = 0.0; t < 1.0; t += 0.01) EXPECT_LE(smoothstep5(t), smoothstep5(t + 0.01));
}

TEST(SmoothedCoefficients, FloorValue) {
    const Grid g(33);
    const ElectrodeSet e;
    const RobinCoefficients rc = smoothed_coefficients(e, g, 5e-4, default_transition_width(g));
    EXPECT_EQ(rc.epsilon, 5e-4);
    EXPECT_EQ(rc.b.min(), 5e-4);
    EXPECT_EQ(rc.b.max(), 1.0);
    // The middle of the vertical sides is farther than w from both electrodes.
    const std::size_t mid_right = g.boundary_position(32, 16);
    EXPECT_EQ(rc.b[mid_right], 5e-4);
    EXPECT_EQ(rc.c[mid_right], 0.0);
}

TEST(SmoothedCoefficients, EpsilonOneIsFlat) {
    const Grid g(17);
    ElectrodeSet e;
    e.aperture = 0.5;
    e.z = 4.0;
    const RobinCoefficients rc = smoothed_coefficients(e, g, 1.0, default_transition_width(g));
    for (std::size_t k = 0; k < g.boundary_count(); ++k) EXPECT_DOUBLE_EQ(rc.b[k], 0.25);
}

TEST(SmoothedCoefficients, TransitionMidpoint) {
    const Grid g(9);
    ElectrodeSet e;
    e.aperture = 0.5;
    const double eps = 5e-4;
    const RobinCoefficients rc = smoothed_coefficients(e, g, eps, 4 * g.h());
    // Corner (1,1) sits 2h = w/2 from the top electrode's right end.
    const std::size_t corner = g.boundary_position(8, 8);
    EXPECT_DOUBLE_EQ(rc.b[corner], (1.0 + eps) / 2.0);
    EXPECT_DOUBLE_EQ(rc.c[corner], 0.5);
}

TEST(SmoothedCoefficients, WidthBelowTwoHRejected) {
    const Grid g(33);
    EXPECT_THROW(smoothed_coefficients(ElectrodeSet{}, g, 1e-3, 1.5 * g.h()), Error);
    EXPECT_NO_THROW(smoothed_coefficients(ElectrodeSet{}, g, 1e-3, 2.0 * g.h()));
    EXPECT_THROW(smoothed_coefficients(ElectrodeSet{}, g, 0.0, 4.0 * g.h()), Error);
    EXPECT_THROW(smoothed_coefficients(ElectrodeSet{}, g, 1.5, 4.0 * g.h()), Error);
}

TEST(SmoothedCoefficients, Invariants) {
    for (double ap : {1.0, 0.5, 0.3}) {
        for (double z : {0.5, 1.0, 3.0}) {
            for (std::size_t n : {17u, 33u, 128u}) {
                const Grid g(n);
                ElectrodeSet e;
                e.aperture = ap;
                e.z = z;
                e.current = 2.0;
                const double eps = 1e-3;
                const double w = default_transition_width(g);
                const RobinCoefficients rc = smoothed_coefficients(e, g, eps, w);
                const RobinCoefficients base = base_coefficients(e, g);
                const auto top = e.top_interval();
                const auto bot = e.bottom_interval();
                for (std::size_t k = 0; k < g.boundary_count(); ++k) {
                    EXPECT_GE(rc.b[k], eps / z - 1e-12);
                    EXPECT_LE(rc.b[k], 1.0 / z + 1e-12);
                    const double s = g.arc_length(k);
                    const double dt = detail::periodic_distance(s, top[0], top[1]);
                    const double db = detail::periodic_distance(s, bot[0], bot[1]);
                    if (std::min(dt, db) >= w) {
                        EXPECT_EQ(rc.c[k], 0.0);
                        EXPECT_EQ(rc.b[k], eps / z);
                    }
                    // Strictly inside an electrode the plateau matches the sharp data.
                    const bool inside_top = s > top[0] + 0.5 * g.h() && s < top[1] - 0.5 * g.h();
                    const bool inside_bot = s > bot[0] + 0.5 * g.h() && s < bot[1] - 0.5 * g.h();
                    if (inside_top || inside_bot) {
                        EXPECT_DOUBLE_EQ(rc.b[k], base.b[k]);
                        EXPECT_DOUBLE_EQ(rc.c[k], base.c[k]);
                    }
                    // Mirror symmetry y -> 1 - y.
                    const std::size_t m = g.mirror_y(k);
                    EXPECT_NEAR(rc.b[m], rc.b[k], 1e-13);
                    EXPECT_NEAR(rc.c[m], -rc.c[k], 1e-13);
                }
                EXPECT_NEAR(sum_ds(rc.c), 0.0, 1e-12);
            }
        }
    }
}

TEST(SmoothedCoefficients, FloorIsLinearInEpsilon) {
    const Grid g(33);
    const std::size_t far = g.boundary_position(0, 16);
    double prev = 1.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const RobinCoefficients rc = smoothed_coefficients(ElectrodeSet{}, g, eps, default_transition_width(g));
        EXPECT_DOUBLE_EQ(rc.b[far], eps);
        EXPECT_LT(rc.b[far], prev);
        prev = rc.b[far];
    }
}

TEST(HarmonicLift, ConstantDataGivesConstant) {
    const Grid g(17);
    const ScalarField h = solve_laplace_dirichlet(BoundaryValues(g, 0.7), g, default_solve_options(g));
    for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(h[k], 0.7, 1e-10);
    const BoundaryValues dn = outward_normal_derivative(h);
    for (std::size_t k = 0; k < dn.size(); ++k) EXPECT_NEAR(dn[k], 0.0, 1e-8);
}

TEST(HarmonicLift, PlateauDataIsPlusMinusZI) {
    const Grid g(33);
    ElectrodeSet e;
    e.z = 1.0;
    e.current = 1.0;
    for (double eps : {1e-3, 0.1, 0.7}) {
        const RobinCoefficients rc = smoothed_coefficients(e, g, eps, default_transition_width(g));
        const HarmonicLift lift = harmonic_lift(rc, g);
        EXPECT_TRUE(lift.stats.converged);
        EXPECT_NEAR(lift.h(16, 32), 1.0, 1e-9);
        EXPECT_NEAR(lift.h(16, 0), -1.0, 1e-9);
    }
}

TEST(HarmonicLift, OddUnderReflection) {
    const Grid g(65);
    const RobinCoefficients rc = smoothed_coefficients(ElectrodeSet{}, g, 5e-4, default_transition_width(g));
    const HarmonicLift lift = harmonic_lift(rc, g);
    EXPECT_NEAR(lift.h(32, 32), 0.0, 1e-9);
    for (std::size_t j = 0; j < g.n(); ++j) {
        for (std::size_t i = 0; i < g.n(); ++i) {
            EXPECT_NEAR(lift.h(i, j), -lift.h(i, g.n() - 1 - j), 1e-9);
        }
    }
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        EXPECT_NEAR(lift.dh_dn[g.mirror_y(k)], -lift.dh_dn[k], 1e-6);
    }
}

TEST(HarmonicLift, EpsilonZeroIsDegenerate) {
    const Grid g(9);
    try {
        harmonic_lift(base_coefficients(ElectrodeSet{}, g), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::degenerate);
    }
}

TEST(HarmonicLift, NormalDerivativeOfQuadratic) {
    // The one-sided stencil is exact on quadratics: u = x^2 - y^2 has
    // du/dn = 2 on x = 1, 0 on x = 0, -2 on y = 1 and 0 on y = 0.
    const Grid g(11);
    const ScalarField u = ScalarField::from_function(g, [](double x, double y) { return x * x - y * y; });
    const BoundaryValues dn = outward_normal_derivative(u);
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        const bool corner = (i == 0 || i == 10) && (j == 0 || j == 10);
        if (corner) continue;
        double expect = 0.0;
        if (i == 10) expect = 2.0;
        if (j == 10) expect = -2.0;
        EXPECT_NEAR(dn[k], expect, 1e-11) << i << "," << j;
    }
}
