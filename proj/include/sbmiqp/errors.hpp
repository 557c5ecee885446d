#ifndef SBMIQP_ERRORS_HPP
#define SBMIQP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbmiqp {

/// Raised when an expression is evaluated outside its guarded domain
/// (log of a nonpositive value, division by zero, sqrt of a negative).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfBounds : std::runtime_error {
    explicit OutOfBounds(const std::string& what) : std::runtime_error(what) {}
};

struct NotLeastSquares : std::runtime_error {
    explicit NotLeastSquares(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateIterate : std::logic_error {
    explicit DuplicateIterate(const std::string& what) : std::logic_error(what) {}
};

struct InvalidRho : std::invalid_argument {
    explicit InvalidRho(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidAlpha : std::invalid_argument {
    explicit InvalidAlpha(const std::string& what) : std::invalid_argument(what) {}
};

struct RestorationFailed : std::runtime_error {
    explicit RestorationFailed(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalBreakdown : std::runtime_error {
    explicit NumericalBreakdown(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sbmiqp

#endif // SBMIQP_ERRORS_HPP
