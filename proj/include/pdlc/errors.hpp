#pragma once

#include <stdexcept>
#include <string>

namespace pdlc {

/// Malformed or inconsistent configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric procedure could not produce a trustworthy answer (no feasible
/// grid point, non-convergence, inconsistent samples). Exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace pdlc
