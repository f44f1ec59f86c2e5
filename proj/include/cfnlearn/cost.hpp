#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cfnlearn {

/// Extended-real cost. Infinity is represented by a large finite sentinel
/// (TOP); every sum involving TOP saturates to TOP.
using Cost = double;

inline constexpr Cost kDefaultTop = 1e9;

/// Saturating addition: TOP absorbs anything, and finite sums that reach TOP
/// are clamped to it.
inline Cost add_saturating(Cost a, Cost b, Cost top) noexcept {
    if (a >= top || b >= top) return top;
    const Cost s = a + b;
    return s >= top ? top : s;
}

inline bool is_top(Cost c, Cost top) noexcept { return c >= top; }

/// Base error for malformed networks, assignments and inputs.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by anything that reads external files (datasets, networks,
/// checkpoints). Carries the 1-based line number when one is known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace cfnlearn
