#ifndef LGR_PHANTOM_HPP
#define LGR_PHANTOM_HPP

#include <lgr/error.hpp>
#include <lgr/field_io.hpp>
#include <lgr/grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace lgr {

// ---------------------------------------------------------------------------
// Binary PGM (P5), 8- or 16-bit.

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> pixels;  // row-major, first row is the top of the image

    std::uint16_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

inline GrayImage decode_pgm(const std::string& bytes) {
    const auto fail = [](const std::string& what) { throw Error(Error::Kind::format, "PGM: " + what); };
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            const char ch = bytes[pos];
            if (ch == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_uint = [&](const char* what) {
        skip_space();
        const std::size_t start = pos;
        unsigned long v = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + static_cast<unsigned long>(bytes[pos] - '0');
            if (v > 1u << 20) fail(std::string(what) + " too large");
            ++pos;
        }
        if (pos == start) fail(std::string("missing ") + what);
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        fail("not a binary graymap (expected magic P5)");
    }
    pos = 2;
    GrayImage img;
    img.width = read_uint("width");
    img.height = read_uint("height");
    const unsigned long maxval = read_uint("maxval");
    if (img.width == 0 || img.height == 0) fail("empty image");
    if (maxval == 0 || maxval > 65535) fail("maxval must lie in [1, 65535]");
    img.maxval = static_cast<unsigned>(maxval);
    if (pos >= bytes.size()) fail("truncated header");
    ++pos;  // single whitespace before the raster

    const std::size_t bpp = maxval < 256 ? 1 : 2;
    const std::size_t count = img.width * img.height;
    if (bytes.size() - pos < bpp * count) fail("truncated raster");
    img.pixels.resize(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t k = 0; k < count; ++k) {
        const unsigned v = bpp == 1 ? p[k] : (static_cast<unsigned>(p[2 * k]) << 8) | p[2 * k + 1];
        if (v > maxval) fail("pixel value exceeds maxval");
        img.pixels[k] = static_cast<std::uint16_t>(v);
    }
    return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    return decode_pgm(read_file_bytes(path));
}

inline std::string encode_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                      std::to_string(img.maxval) + "\n";
    const bool wide = img.maxval > 255;
    for (std::uint16_t v : img.pixels) {
        if (wide) out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xff));
    }
    return out;
}

// Renders a field as a 16-bit image, mapping [lo, hi] affinely onto
// [0, 65535]; y grows upward so the top image row is j = n-1.
inline GrayImage field_to_image(const ScalarField& f, double lo, double hi) {
    require(hi >= lo, Error::Kind::invalid_argument, "export range needs lo <= hi");
    const std::size_t n = f.grid().n();
    GrayImage img;
    img.width = n;
    img.height = n;
    img.maxval = 65535;
    img.pixels.resize(n * n);
    const double span = hi - lo;
    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t j = n - 1 - row;
        for (std::size_t i = 0; i < n; ++i) {
            double t = span > 0.0 ? (f(i, j) - lo) / span : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            img.pixels[row * n + i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Phantoms

enum class PhantomKind { blobs, ellipses, image };

inline PhantomKind parse_phantom_kind(const std::string& s) {
    if (s == "blobs") return PhantomKind::blobs;
    if (s == "ellipses") return PhantomKind::ellipses;
    if (s == "image") return PhantomKind::image;
    throw Error(Error::Kind::invalid_argument, "unknown phantom kind '" + s + "'");
}

struct Ellipse {
    double cx = 0.5, cy = 0.5;
    double ax = 0.2, ay = 0.1;  // semi-axes
    double angle = 0.0;         // radians, counterclockwise
    double value = 1.8;

    bool contains(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double dx = x - cx, dy = y - cy;
        const double u = (c * dx + s * dy) / ax;
        const double v = (-s * dx + c * dy) / ay;
        return u * u + v * v <= 1.0;
    }
};

struct PhantomSpec {
    PhantomKind kind = PhantomKind::blobs;
    std::size_t n = 128;
    double lo = 1.0;
    double hi = 1.8;
    std::uint64_t seed = 1;
    // blobs
    std::size_t count = 4;
    double width_min = 0.05;
    double width_max = 0.12;
    // ellipses
    std::vector<Ellipse> ellipses;
    // image
    std::filesystem::path image_path;
    double margin = 0.1;  // fraction of the side left as background on each edge

    void validate() const {
        require(lo > 0.0 && lo <= hi, Error::Kind::invalid_argument, "phantom range needs 0 < lo <= hi");
        require(width_min > 0.0 && width_min <= width_max, Error::Kind::invalid_argument,
                "blob widths need 0 < min <= max");
        require(margin >= 0.0 && margin < 0.5, Error::Kind::invalid_argument, "image margin must lie in [0, 0.5)");
        for (const Ellipse& e : ellipses) {
            require(e.ax > 0.0 && e.ay > 0.0, Error::Kind::invalid_argument, "ellipse semi-axes must be positive");
            require(e.cx >= 0.0 && e.cx <= 1.0 && e.cy >= 0.0 && e.cy <= 1.0, Error::Kind::invalid_argument,
                    "ellipse center must lie in the unit square");
        }
    }
};

namespace detail {

inline ScalarField blob_phantom(const Grid& grid, const PhantomSpec& spec) {
    ScalarField f(grid, 0.0);
    if (spec.count == 0) return ScalarField(grid, spec.lo);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> center(0.25, 0.75);
    std::uniform_real_distribution<double> width(spec.width_min, spec.width_max);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    for (std::size_t b = 0; b < spec.count; ++b) {
        const double cx = center(rng), cy = center(rng), w = width(rng), A = amp(rng);
        const double inv = 1.0 / (2.0 * w * w);
        for (std::size_t j = 0; j < grid.n(); ++j) {
            for (std::size_t i = 0; i < grid.n(); ++i) {
                const double dx = grid.coord(i) - cx, dy = grid.coord(j) - cy;
                f(i, j) += A * std::exp(-(dx * dx + dy * dy) * inv);
            }
        }
    }
    const double fmin = f.min(), fmax = f.max();
    ScalarField out(grid, spec.lo);
    if (fmax <= fmin) return out;
    for (std::size_t k = 0; k < f.size(); ++k) {
        out[k] = std::clamp(spec.lo + (spec.hi - spec.lo) * (f[k] - fmin) / (fmax - fmin), spec.lo, spec.hi);
    }
    return out;
}

inline ScalarField ellipse_phantom(const Grid& grid, const PhantomSpec& spec) {
    ScalarField out(grid, spec.lo);
    for (std::size_t j = 0; j < grid.n(); ++j) {
        for (std::size_t i = 0; i < grid.n(); ++i) {
            for (const Ellipse& e : spec.ellipses) {
                if (e.contains(grid.coord(i), grid.coord(j))) {
                    out(i, j) = std::clamp(e.value, spec.lo, spec.hi);
                }
            }
        }
    }
    return out;
}

// The image fills the square [margin, 1 - margin]^2 by nearest-pixel
// sampling; gray g maps to lo + (hi - lo) g / maxval, the margin is lo.
inline ScalarField image_phantom(const Grid& grid, const PhantomSpec& spec) {
    const GrayImage img = read_pgm(spec.image_path);
    ScalarField out(grid, spec.lo);
    const double inner = 1.0 - 2.0 * spec.margin;
    for (std::size_t j = 0; j < grid.n(); ++j) {
        for (std::size_t i = 0; i < grid.n(); ++i) {
            const double u = (grid.coord(i) - spec.margin) / inner;
            const double v = (grid.coord(j) - spec.margin) / inner;
            if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
            const auto px = std::min(img.width - 1, static_cast<std::size_t>(u * static_cast<double>(img.width)));
            // Image rows run top to bottom while y runs upward.
            const auto py = std::min(img.height - 1, static_cast<std::size_t>((1.0 - v) * static_cast<double>(img.height)));
            const double g = static_cast<double>(img.at(px, py)) / static_cast<double>(img.maxval);
            out(i, j) = spec.lo + (spec.hi - spec.lo) * g;
        }
    }
    return out;
}

} // namespace detail

inline ScalarField generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    const Grid grid(spec.n);
    switch (spec.kind) {
    case PhantomKind::blobs: return detail::blob_phantom(grid, spec);
    case PhantomKind::ellipses: return detail::ellipse_phantom(grid, spec);
    case PhantomKind::image: return detail::image_phantom(grid, spec);
    }
    throw Error(Error::Kind::invalid_argument, "unknown phantom kind");
}

} // namespace lgr

#endif
