#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xbarsim {

// Every failure raised by the library derives from Error. The category
// decides how the command-line tool maps it onto an exit code.
enum class ErrorKind {
    InvalidInput,     // malformed arguments, violated preconditions
    OutOfRange,       // value outside a feasible interval
    Infeasible,       // normalization cannot be satisfied by a device
    NumericalFailure, // singular / indefinite system, diverged integration
    NoFit,            // curve fit impossible on degenerate data
    Timeout,          // settling not reached inside the allowed window
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what)
        : Error(ErrorKind::InvalidInput, what) {}
};

class OutOfRange : public Error {
public:
    OutOfRange(const std::string& what, double lo, double hi)
        : Error(ErrorKind::OutOfRange, what), lo_(lo), hi_(hi) {}

    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

class InfeasibleNormalization : public Error {
public:
    InfeasibleNormalization(const std::string& what, std::size_t row)
        : Error(ErrorKind::Infeasible, what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class NumericalFailure : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit NumericalFailure(const std::string& what, std::size_t pivot = npos)
        : Error(ErrorKind::NumericalFailure, what), pivot_(pivot) {}

    // Unknown index at which factorization broke down, or npos.
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class NoFit : public Error {
public:
    explicit NoFit(const std::string& what) : Error(ErrorKind::NoFit, what) {}
};

class Timeout : public Error {
public:
    Timeout(const std::string& what, double residual)
        : Error(ErrorKind::Timeout, what), residual_(residual) {}

    // Largest relative distance from the settled value when time ran out.
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace xbarsim
