#pragma once

#include <stdexcept>
#include <string>

namespace ilwlab {

/// Invalid user-supplied parameter (grid size, delta, unknown key, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Mismatched array lengths or grids.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// An operation's stated precondition does not hold for the given data.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Query outside the available range (e.g. time outside a trajectory).
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

/// Time stepping produced non-finite or absurdly large coefficients.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, double t_blowup)
        : std::runtime_error(msg), blow_up_time(t_blowup) {}
    double blow_up_time;
};

/// Malformed or version-mismatched serialized data.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ilwlab
