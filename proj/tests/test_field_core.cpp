#include <lgr/field_io.hpp>
#include <lgr/grid.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

using namespace lgr;

namespace {

ScalarField random_field(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng);
    return f;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lgr_test_" + name);
}

} // namespace

TEST(Grid, SmallestGrid) {
    const Grid g = make_grid(3);
    EXPECT_EQ(g.h(), 0.5);
    EXPECT_EQ(g.node_count(), 9u);
    EXPECT_EQ(g.boundary_count(), 8u);
}

TEST(Grid, Spacing) {
    EXPECT_DOUBLE_EQ(make_grid(101).h(), 0.01);
    EXPECT_NEAR(make_grid(256).h(), 0.0039216, 1e-7);
    EXPECT_DOUBLE_EQ(make_grid(256).h(), 1.0 / 255.0);
}

TEST(Grid, TooSmallThrows) {
    try {
        make_grid(2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::invalid_grid);
    }
}

TEST(Grid, LastCoordinateIsExactlyOne) {
    for (std::size_t n : {3u, 7u, 65u, 128u, 129u}) {
        const Grid g(n);
        EXPECT_EQ(g.coord(n - 1), 1.0);
        EXPECT_EQ(g.coord(0), 0.0);
    }
}

TEST(Grid, BoundaryNodesAreTheEdges) {
    const Grid g(6);
    std::size_t count = 0;
    for (std::size_t j = 0; j < g.n(); ++j) {
        for (std::size_t i = 0; i < g.n(); ++i) {
            const bool expect = i == 0 || j == 0 || i == 5 || j == 5;
            EXPECT_EQ(g.is_boundary(i, j), expect);
            count += expect;
        }
    }
    EXPECT_EQ(count, g.boundary_count());
    for (std::size_t k = 0; k < g.boundary_count(); ++k) {
        auto [i, j] = g.boundary_node(k);
        EXPECT_TRUE(g.is_boundary(i, j));
        EXPECT_EQ(g.boundary_position(i, j), k);
    }
}

TEST(Gradient, ConstantFieldHasZeroGradient) {
    const Grid g(9);
    const VectorField gr = gradient(ScalarField(g, 3.7));
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        EXPECT_EQ(gr.x[c], 0.0);
        EXPECT_EQ(gr.y[c], 0.0);
    }
}

TEST(Gradient, LinearInY) {
    const Grid g(17);
    const VectorField gr = gradient(ScalarField::from_function(g, [](double, double y) { return y; }));
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        EXPECT_EQ(gr.x[c], 0.0);
        EXPECT_NEAR(gr.y[c], 1.0, 1e-13);
    }
}

TEST(Gradient, HandEvaluatedOnThreeByThree) {
    const Grid g(3);
    const VectorField gr = gradient(ScalarField::from_function(g, [](double x, double y) { return x + 2 * y; }));
    ASSERT_EQ(gr.x.size(), 4u);
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_DOUBLE_EQ(gr.x[c], 1.0);
        EXPECT_DOUBLE_EQ(gr.y[c], 2.0);
    }
}

TEST(Gradient, ExactOnAffineFields) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double al = d(rng), be = d(rng), ga = d(rng);
        const Grid g(33);
        const VectorField gr =
            gradient(ScalarField::from_function(g, [&](double x, double y) { return al * x + be * y + ga; }));
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            EXPECT_NEAR(gr.x[c], al, 1e-13 * 10);
            EXPECT_NEAR(gr.y[c], be, 1e-13 * 10);
        }
    }
}

TEST(Gradient, DivergenceIsNegativeAdjoint) {
    const Grid g(21);
    const ScalarField v = random_field(g, 3);
    VectorField F(g);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const std::size_t m = g.n() - 1;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        for (std::size_t i = 1; i + 1 < m; ++i) {
            F.x[g.cell_index(i, j)] = d(rng);
            F.y[g.cell_index(i, j)] = d(rng);
        }
    }
    const VectorField gv = gradient(v);
    const ScalarField div = divergence(F);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        lhs += gv.x[c] * F.x[c] + gv.y[c] * F.y[c];
        scale += std::abs(gv.x[c] * F.x[c]) + std::abs(gv.y[c] * F.y[c]);
    }
    for (std::size_t k = 0; k < v.size(); ++k) rhs -= v[k] * div[k];
    const double h2 = g.h() * g.h();
    EXPECT_LE(std::abs(lhs - rhs) * h2, 1e-12 * scale * h2);
}

TEST(WeightedTv, ConstantFieldIsZero) {
    const Grid g(11);
    EXPECT_EQ(weighted_tv(ScalarField(g, 2.0), random_field(g, 1, 0.0, 3.0)), 0.0);
}

TEST(WeightedTv, LinearFields) {
    const Grid g(41);
    const auto vx = ScalarField::from_function(g, [](double x, double) { return x; });
    EXPECT_NEAR(weighted_tv(vx, ScalarField(g, 2.0)), 2.0, 1e-13);
    const Grid g101(101);
    const auto vy = ScalarField::from_function(g101, [](double, double y) { return y; });
    EXPECT_NEAR(weighted_tv(vy, ScalarField(g101, 1.0)), 1.0, 1e-12);
}

TEST(WeightedTv, GridMismatchThrows) {
    try {
        weighted_tv(ScalarField(Grid(5)), ScalarField(Grid(6)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::dimension);
    }
}

TEST(WeightedTv, OneHomogeneous) {
    const Grid g(17);
    const ScalarField v = random_field(g, 5);
    const ScalarField a = random_field(g, 6, 0.0, 2.0);
    const double base = weighted_tv(v, a);
    for (double c : {-3.0, -0.5, 0.0, 0.25, 7.0}) {
        ScalarField cv = v;
        for (std::size_t k = 0; k < cv.size(); ++k) cv[k] *= c;
        EXPECT_NEAR(weighted_tv(cv, a), std::abs(c) * base, 1e-12 * (1 + std::abs(c) * base));
    }
}

TEST(WeightedTv, MonotoneInWeight) {
    const Grid g(17);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ScalarField v = random_field(g, 100 + s);
        const ScalarField a1 = random_field(g, 200 + s, 0.0, 1.0);
        ScalarField a2 = a1;
        const ScalarField bump = random_field(g, 300 + s, 0.0, 0.5);
        for (std::size_t k = 0; k < a2.size(); ++k) a2[k] += bump[k];
        EXPECT_LE(weighted_tv(v, a1), weighted_tv(v, a2));
    }
}

TEST(RelL2, Examples) {
    const Grid g(9);
    const ScalarField gf = random_field(g, 9, 0.5, 1.5);
    EXPECT_EQ(rel_l2_error(gf, gf), 0.0);
    ScalarField f = gf;
    for (std::size_t k = 0; k < f.size(); ++k) f[k] *= 1.01;
    EXPECT_NEAR(rel_l2_error(f, gf), 0.01, 1e-14);
    EXPECT_NEAR(rel_l2_error(ScalarField(g, 1.8), ScalarField(g, 1.0)), 0.8, 1e-14);
    EXPECT_TRUE(std::isinf(rel_l2_error(ScalarField(g, 1.0), ScalarField(g, 0.0))));
    EXPECT_EQ(rel_l2_error(ScalarField(g, 0.0), ScalarField(g, 0.0)), 0.0);
}

TEST(BoundaryTrace, Ordering) {
    const Grid g(3);
    const BoundaryValues c = boundary_trace(ScalarField(g, 4.0));
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(c[k], 4.0);

    const BoundaryValues tx = boundary_trace(ScalarField::from_function(g, [](double x, double) { return x; }));
    const double expect[8] = {0.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.0, 0.0};
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(tx[k], expect[k]) << "position " << k;

    const Grid g9(9);
    const BoundaryValues ty = boundary_trace(ScalarField::from_function(g9, [](double, double y) { return y; }));
    for (std::size_t k = 0; k < ty.size(); ++k) {
        auto [i, j] = g9.boundary_node(k);
        if (j == 0) EXPECT_EQ(ty[k], 0.0);
        if (j == 8) EXPECT_EQ(ty[k], 1.0);
    }
}

TEST(FieldIo, RoundTripIsBitExact) {
    const Grid g(32);
    ScalarField f = random_field(g, 77);
    f[3] = -0.0;
    f[4] = 1e-310;  // subnormal
    const auto path = temp_path("roundtrip.fld");
    write_field(f, path);
    const ScalarField back = read_field(path);
    ASSERT_EQ(back.size(), f.size());
    EXPECT_EQ(std::memcmp(back.data().data(), f.data().data(), f.size() * sizeof(double)), 0);
    std::filesystem::remove(path);
}

TEST(FieldIo, OnesPayloadHexDump) {
    const std::string bytes = encode_field(ScalarField(Grid(3), 1.0));
    const std::string header = "FLD1 3 3\n";
    ASSERT_EQ(bytes.size(), header.size() + 72);
    EXPECT_EQ(bytes.substr(0, header.size()), header);
    const unsigned char one_le[8] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xf0, 0x3f};
    for (std::size_t v = 0; v < 9; ++v) {
        for (std::size_t b = 0; b < 8; ++b) {
            EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 8 * v + b]), one_le[b]);
        }
    }
}

TEST(FieldIo, SizeMismatch) {
    std::string bytes = "FLD1 16 16\n" + std::string(255 * 8, '\0');
    try {
        decode_field(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::format);
    }
    bytes += std::string(16, '\0');  // trailing bytes
    EXPECT_THROW(decode_field(bytes), Error);
}

TEST(FieldIo, MalformedHeadersRejected) {
    const std::string payload(9 * 8, '\0');
    for (const std::string& head : {"FLD2 3 3\n", "FLD1 3\n", "FLD1 3 3", "FLD1 3 4\n", "FLD1 -3 3\n",
                                    "fld1 3 3\n", "FLD1 3 3 \n"}) {
        EXPECT_THROW(decode_field(head + payload), Error) << head;
    }
}

TEST(FieldIo, NonFinitePayloadRejected) {
    ScalarField f(Grid(3), 0.0);
    std::string bytes = encode_field(f);
    const double nan = std::nan("");
    std::memcpy(bytes.data() + bytes.size() - 8, &nan, 8);
    try {
        decode_field(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::format);
        EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
    }
}

TEST(FieldIo, MissingFileIsIoError) {
    try {
        read_field(temp_path("does_not_exist.fld"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::io);
    }
}
