#ifndef LGR_ERROR_HPP
#define LGR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lgr {

// Every failure raised by the library derives from lgr::Error so callers can
// map errors to exit codes by kind().
class Error : public std::runtime_error {
public:
    enum class Kind {
        invalid_grid,
        dimension,
        format,
        invalid_argument,
        assembly,
        not_spd,
        degenerate,
        solver,
        io,
    };

    Error(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

inline void require(bool cond, Error::Kind kind, const std::string& what) {
    if (!cond) {
        throw Error(kind, what);
    }
}

} // namespace lgr

#endif
