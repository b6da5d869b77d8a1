#include <lgr/phantom.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace lgr;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lgr_test_" + name);
}

} // namespace

TEST(Phantom, EmptyBlobsAreBackground) {
    PhantomSpec s;
    s.n = 33;
    s.count = 0;
    const ScalarField f = generate_phantom(s);
    EXPECT_EQ(f.min(), 1.0);
    EXPECT_EQ(f.max(), 1.0);
}

TEST(Phantom, BlobsSpanTheRangeAndAreDeterministic) {
    PhantomSpec s;
    s.n = 65;
    s.seed = 7;
    const ScalarField f = generate_phantom(s);
    EXPECT_DOUBLE_EQ(f.min(), 1.0);
    EXPECT_DOUBLE_EQ(f.max(), 1.8);
    EXPECT_EQ(generate_phantom(s), f);
    s.seed = 8;
    EXPECT_FALSE(generate_phantom(s) == f);
}

TEST(Phantom, CenteredEllipse) {
    PhantomSpec s;
    s.kind = PhantomKind::ellipses;
    s.n = 65;
    s.ellipses.push_back(Ellipse{0.5, 0.5, 0.25, 0.15, 0.3, 1.8});
    const ScalarField f = generate_phantom(s);
    EXPECT_EQ(f(32, 32), 1.8);
    EXPECT_EQ(f(0, 0), 1.0);
    EXPECT_EQ(f.max(), 1.8);
    EXPECT_EQ(f.min(), 1.0);
    std::set<double> values(f.data().begin(), f.data().end());
    EXPECT_EQ(values.size(), 2u);
}

TEST(Phantom, TwoLevelPgm) {
    GrayImage img;
    img.width = 4;
    img.height = 4;
    img.maxval = 255;
    img.pixels = {0, 255, 0, 255, 255, 0, 255, 0, 0, 0, 255, 255, 255, 255, 0, 0};
    const auto path = temp_path("two_level.pgm");
    write_file_atomic(path, encode_pgm(img));
    PhantomSpec s;
    s.kind = PhantomKind::image;
    s.n = 41;
    s.image_path = path;
    const ScalarField f = generate_phantom(s);
    std::set<double> values(f.data().begin(), f.data().end());
    EXPECT_EQ(values, (std::set<double>{1.0, 1.8}));
    // The margin is background.
    EXPECT_EQ(f(0, 20), 1.0);
    EXPECT_EQ(f(20, 40), 1.0);
    std::filesystem::remove(path);
}

TEST(Pgm, RoundTripSixteenBit) {
    GrayImage img;
    img.width = 3;
    img.height = 2;
    img.maxval = 65535;
    img.pixels = {0, 1, 256, 65535, 4000, 12};
    const GrayImage back = decode_pgm(encode_pgm(img));
    EXPECT_EQ(back.width, 3u);
    EXPECT_EQ(back.height, 2u);
    EXPECT_EQ(back.maxval, 65535u);
    EXPECT_EQ(back.pixels, img.pixels);
}

TEST(Pgm, CommentsAccepted) {
    const std::string bytes = std::string("P5\n# made by hand\n2 1\n255\n") + '\x10' + '\x20';
    const GrayImage img = decode_pgm(bytes);
    EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{16, 32}));
}

TEST(Pgm, ForeignFormatsRejected) {
    EXPECT_THROW(decode_pgm("P2\n2 2\n255\n0 0 0 0"), Error);
    EXPECT_THROW(decode_pgm("\x89PNG...."), Error);
    EXPECT_THROW(decode_pgm(std::string("P5\n2 2\n255\n") + "ab"), Error);
    EXPECT_THROW(decode_pgm(std::string("P5\n1 1\n10\n") + '\x20'), Error);
    PhantomSpec s;
    s.kind = PhantomKind::image;
    s.image_path = temp_path("missing.pgm");
    try {
        generate_phantom(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::io);
    }
}

TEST(Pgm, FieldExportOrientation) {
    const Grid g(5);
    const ScalarField f = ScalarField::from_function(g, [](double, double y) { return y; });
    const GrayImage img = field_to_image(f, 0.0, 1.0);
    EXPECT_EQ(img.at(0, 0), 65535);  // top row is y = 1
    EXPECT_EQ(img.at(0, 4), 0);
    EXPECT_EQ(img.at(3, 2), 32768);
}

TEST(PhantomSpec, Validation) {
    PhantomSpec s;
    s.lo = 0.0;
    EXPECT_THROW(generate_phantom(s), Error);
    s.lo = 2.0;
    s.hi = 1.0;
    EXPECT_THROW(generate_phantom(s), Error);
    EXPECT_EQ(parse_phantom_kind("ellipses"), PhantomKind::ellipses);
    EXPECT_THROW(parse_phantom_kind("ct"), Error);
}
