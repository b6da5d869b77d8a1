#ifndef LGR_PCG_HPP
#define LGR_PCG_HPP

#include <lgr/error.hpp>
#include <lgr/sparse.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgr {

enum class Preconditioner { jacobi, ic0 };

inline const char* to_string(Preconditioner p) {
    return p == Preconditioner::jacobi ? "jacobi" : "ic0";
}

inline Preconditioner parse_preconditioner(const std::string& s) {
    if (s == "jacobi") return Preconditioner::jacobi;
    if (s == "ic0") return Preconditioner::ic0;
    throw Error(Error::Kind::invalid_argument, "unknown preconditioner '" + s + "'");
}

struct SolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    Preconditioner preconditioner = Preconditioner::jacobi;
    bool converged = false;
};

struct SolveResult {
    std::vector<double> x;
    SolveStats stats;
};

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 1000;
    Preconditioner preconditioner = Preconditioner::jacobi;
    // Starting iterate; zero when absent.
    std::optional<std::span<const double>> initial_guess;
};

namespace detail {

class JacobiPreconditioner {
public:
    explicit JacobiPreconditioner(const CsrMatrix& a) : inv_diag_(a.rows) {
        const std::vector<double> d = a.diagonal();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!(d[i] > 0.0)) {
                throw Error(Error::Kind::not_spd, "nonpositive diagonal entry at row " + std::to_string(i));
            }
            inv_diag_[i] = 1.0 / d[i];
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const {
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
    }

private:
    std::vector<double> inv_diag_;
};

// Zero fill-in incomplete Cholesky, A ~ L L^T with L on the lower pattern of A.
class IncompleteCholesky {
public:
    explicit IncompleteCholesky(const CsrMatrix& a) {
        const std::size_t n = a.rows;
        offsets_.push_back(0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
                if (a.columns[k] <= i) {
                    cols_.push_back(a.columns[k]);
                    vals_.push_back(a.values[k]);
                }
            }
            offsets_.push_back(cols_.size());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t begin = offsets_[i], end = offsets_[i + 1];
            if (end == begin || cols_[end - 1] != i) {
                throw Error(Error::Kind::not_spd, "missing diagonal entry at row " + std::to_string(i));
            }
            for (std::size_t k = begin; k < end - 1; ++k) {
                const std::size_t j = cols_[k];
                // Sparse dot of rows i and j over columns < j.
                double s = 0.0;
                std::size_t p = begin, q = offsets_[j];
                const std::size_t qend = offsets_[j + 1] - 1;
                while (p < k && q < qend) {
                    if (cols_[p] == cols_[q]) s += vals_[p++] * vals_[q++];
                    else if (cols_[p] < cols_[q]) ++p;
                    else ++q;
                }
                vals_[k] = (vals_[k] - s) / vals_[qend];
            }
            double d = vals_[end - 1];
            for (std::size_t k = begin; k < end - 1; ++k) d -= vals_[k] * vals_[k];
            if (!(d > 0.0)) {
                throw Error(Error::Kind::not_spd, "incomplete Cholesky breakdown at row " + std::to_string(i));
            }
            vals_[end - 1] = std::sqrt(d);
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const {
        const std::size_t n = offsets_.size() - 1;
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            const std::size_t end = offsets_[i + 1] - 1;
            for (std::size_t k = offsets_[i]; k < end; ++k) s -= vals_[k] * z[cols_[k]];
            z[i] = s / vals_[end];
        }
        for (std::size_t i = n; i-- > 0;) {
            const std::size_t end = offsets_[i + 1] - 1;
            z[i] /= vals_[end];
            const double zi = z[i];
            for (std::size_t k = offsets_[i]; k < end; ++k) z[cols_[k]] -= vals_[k] * zi;
        }
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
};

template <class Precond>
SolveResult pcg_loop(const SparseSystem& sys, const SolveOptions& opt, const Precond& m) {
    const std::size_t n = sys.dimension();
    SolveResult res;
    res.stats.preconditioner = opt.preconditioner;
    res.x.assign(n, 0.0);
    if (opt.initial_guess) {
        require(opt.initial_guess->size() == n, Error::Kind::dimension, "pcg: initial guess has wrong size");
        std::copy(opt.initial_guess->begin(), opt.initial_guess->end(), res.x.begin());
    }

    const double bnorm = std::sqrt(dot(sys.rhs, sys.rhs));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.stats.converged = true;
        return res;
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    sys.matrix.multiply(res.x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= opt.tol * bnorm) {
        res.stats.relative_residual = rnorm / bnorm;
        res.stats.converged = true;
        return res;
    }

    m.apply(r, z);
    p = z;
    double rz = dot(r, z);
    std::size_t it = 0;
    while (it < opt.max_iter) {
        ++it;
        sys.matrix.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            // A roundoff-sized <p, Ap> means the iteration has stagnated.
            const double pp = dot(p, p);
            if (std::isfinite(pap) && std::abs(pap) <= 1e-13 * pp * sys.matrix.max_abs()) break;
            throw Error(Error::Kind::not_spd, "pcg: <p, Ap> = " + std::to_string(pap) +
                                                  " at iteration " + std::to_string(it) +
                                                  "; matrix is not positive definite");
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= opt.tol * bnorm) {
            // The recurrence residual drifts from the true one by roundoff;
            // confirm, and restart from the true residual if needed.
            sys.matrix.multiply(res.x, ap);
            for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
            rnorm = std::sqrt(dot(r, r));
            if (rnorm <= opt.tol * bnorm) break;
            m.apply(r, z);
            p = z;
            rz = dot(r, z);
            continue;
        }
        m.apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.stats.iterations = it;
    res.stats.relative_residual = relative_residual(sys, res.x);
    res.stats.converged = res.stats.relative_residual <= opt.tol;
    return res;
}

} // namespace detail

// Preconditioned conjugate gradients. A non-converged solve is reported
// through stats.converged with the last iterate; an indefinite direction
// throws Error::Kind::not_spd.
inline SolveResult pcg_solve(const SparseSystem& sys, const SolveOptions& opt) {
    require(opt.tol > 0.0 && opt.tol < 1.0, Error::Kind::invalid_argument, "pcg: tol must lie in (0,1)");
    require(opt.max_iter >= 1, Error::Kind::invalid_argument, "pcg: max_iter must be at least 1");
    require(sys.rhs.size() == sys.dimension(), Error::Kind::dimension, "pcg: rhs size mismatch");
    if (opt.preconditioner == Preconditioner::ic0) {
        return detail::pcg_loop(sys, opt, detail::IncompleteCholesky(sys.matrix));
    }
    return detail::pcg_loop(sys, opt, detail::JacobiPreconditioner(sys.matrix));
}

inline SolveResult pcg_solve(const SparseSystem& sys, double tol, std::size_t max_iter) {
    SolveOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return pcg_solve(sys, opt);
}

} // namespace lgr

#endif
