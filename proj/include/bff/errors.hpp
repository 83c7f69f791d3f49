#pragma once

#include <stdexcept>
#include <string>

namespace bff {

/// Bad or unreadable input: missing files, malformed containers, parse failures.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input was readable but violates a model invariant (geometry mismatch,
/// probabilities off the simplex, nothing left to score).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfBounds : public std::out_of_range {
public:
    OutOfBounds(double x, double y);

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

private:
    double x_;
    double y_;
};

}  // namespace bff
