#ifndef LGR_SPARSE_HPP
#define LGR_SPARSE_HPP

#include <lgr/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lgr {

// Compressed sparse row matrix with sorted, unique column indices per row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_offsets;
    std::vector<std::size_t> columns;
    std::vector<double> values;

    std::size_t nonzeros() const noexcept { return values.size(); }

    double at(std::size_t i, std::size_t j) const {
        const auto first = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
        const auto last = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - columns.begin())];
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                s += values[k] * x[columns[k]];
            }
            y[i] = s;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(rows);
        multiply(x, y);
        return y;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) d[i] = at(i, i);
        return d;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    // Largest |a_ij - a_ji| relative to max |a|; 0 for an exactly symmetric matrix.
    double asymmetry() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                worst = std::max(worst, std::abs(values[k] - at(columns[k], i)));
            }
        }
        const double scale = max_abs();
        return scale > 0.0 ? worst / scale : 0.0;
    }
};

// Accumulates (row, col, value) contributions; duplicates are summed.
class MatrixBuilder {
public:
    explicit MatrixBuilder(std::size_t rows) : entries_(rows) {}

    void add(std::size_t i, std::size_t j, double v) { entries_[i].emplace_back(j, v); }

    // Adds k to (i,i) and (j,j) and -k to (i,j) and (j,i).
    void add_edge(std::size_t i, std::size_t j, double k) {
        add(i, i, k);
        add(j, j, k);
        add(i, j, -k);
        add(j, i, -k);
    }

    CsrMatrix build() {
        CsrMatrix m;
        m.rows = entries_.size();
        m.row_offsets.reserve(m.rows + 1);
        m.row_offsets.push_back(0);
        for (auto& row : entries_) {
            std::sort(row.begin(), row.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t k = 0; k < row.size();) {
                const std::size_t col = row[k].first;
                double v = 0.0;
                while (k < row.size() && row[k].first == col) v += row[k++].second;
                m.columns.push_back(col);
                m.values.push_back(v);
            }
            m.row_offsets.push_back(m.columns.size());
            row.clear();
            row.shrink_to_fit();
        }
        return m;
    }

private:
    std::vector<std::vector<std::pair<std::size_t, double>>> entries_;
};

// A symmetric linear system. The first field_unknowns entries of the solution
// are nodal values; a bordered system carries one extra scalar unknown after
// them.
struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::size_t field_unknowns = 0;
    bool bordered = false;

    std::size_t dimension() const noexcept { return matrix.rows; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Relative residual ||A x - b|| / ||b|| (||A x|| when b = 0).
inline double relative_residual(const SparseSystem& sys, std::span<const double> x) {
    std::vector<double> r = sys.matrix.multiply(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - sys.rhs[i];
        num += d * d;
        den += sys.rhs[i] * sys.rhs[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// 1/2 x^T A x - b^T x, the quadratic energy minimized by the solution.
inline double quadratic_energy(const SparseSystem& sys, std::span<const double> x) {
    const std::vector<double> ax = sys.matrix.multiply(x);
    return 0.5 * dot(x, ax) - dot(sys.rhs, x);
}

} // namespace lgr

#endif
