#ifndef LGR_FIELD_IO_HPP
#define LGR_FIELD_IO_HPP

#include <lgr/error.hpp>
#include <lgr/grid.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace lgr {

// FLD1 layout: ASCII line "FLD1 <nx> <ny>\n", then nx*ny little-endian
// binary64 values in row-major order, nothing after.

namespace detail {

inline void put_le64(std::string& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
}

inline double get_le64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
        bits = (bits << 8) | p[b];
    }
    return std::bit_cast<double>(bits);
}

inline bool parse_dimension(const std::string& tok, std::size_t& out) {
    if (tok.empty() || tok.size() > 9) return false;
    for (char ch : tok) {
        if (ch < '0' || ch > '9') return false;
    }
    out = std::stoul(tok);
    return true;
}

} // namespace detail

inline std::string encode_field(const ScalarField& u) {
    const std::size_t n = u.grid().n();
    std::string out = "FLD1 " + std::to_string(n) + " " + std::to_string(n) + "\n";
    out.reserve(out.size() + 8 * u.size());
    for (double v : u.values()) {
        detail::put_le64(out, v);
    }
    return out;
}

inline ScalarField decode_field(const std::string& bytes) {
    const auto fail = [](const std::string& what) { throw Error(Error::Kind::format, "FLD1: " + what); };

    const std::size_t eol = bytes.find('\n');
    if (eol == std::string::npos || eol > 64) fail("missing header line");
    const std::string header = bytes.substr(0, eol);

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos <= header.size()) {
        const std::size_t sp = header.find(' ', pos);
        const std::size_t end = sp == std::string::npos ? header.size() : sp;
        tokens.push_back(header.substr(pos, end - pos));
        if (sp == std::string::npos) break;
        pos = sp + 1;
    }
    if (tokens.size() != 3) fail("header must be 'FLD1 <nx> <ny>'");
    if (tokens[0] != "FLD1") fail("bad magic '" + tokens[0] + "'");
    std::size_t nx = 0, ny = 0;
    if (!detail::parse_dimension(tokens[1], nx)) fail("bad nx '" + tokens[1] + "'");
    if (!detail::parse_dimension(tokens[2], ny)) fail("bad ny '" + tokens[2] + "'");
    if (nx != ny) fail("nx and ny differ (" + tokens[1] + " vs " + tokens[2] + "); only square grids are supported");
    if (nx < 3) fail("nx must be at least 3");

    const std::size_t count = nx * ny;
    const std::size_t payload = bytes.size() - eol - 1;
    if (payload != 8 * count) {
        std::ostringstream msg;
        msg << "size mismatch: header declares " << count << " values but payload holds "
            << payload / 8 << (payload % 8 ? " values plus a partial value" : " values");
        fail(msg.str());
    }

    Grid grid(nx);
    ScalarField out(grid);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + eol + 1);
    for (std::size_t k = 0; k < count; ++k) {
        const double v = detail::get_le64(p + 8 * k);
        if (!std::isfinite(v)) {
            fail("non-finite value at index " + std::to_string(k) + " (i=" +
                 std::to_string(k % nx) + ", j=" + std::to_string(k / nx) + ")");
        }
        out[k] = v;
    }
    return out;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Error::Kind::io, "cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Writes to a sibling temp file and renames it over the target, so a
// partially written file never appears under the final name.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), Error::Kind::io, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        require(static_cast<bool>(out), Error::Kind::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(Error::Kind::io, "cannot rename " + tmp.string() + " to " + path.string() +
                                         ": " + ec.message());
    }
}

inline void write_field(const ScalarField& u, const std::filesystem::path& path) {
    write_file_atomic(path, encode_field(u));
}

inline ScalarField read_field(const std::filesystem::path& path) {
    return decode_field(read_file_bytes(path));
}

} // namespace lgr

#endif
