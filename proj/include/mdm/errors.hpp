#pragma once

#include <stdexcept>
#include <string>

namespace mdm {

// Bad input: parameters outside the model's domain or a violated precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to converge or produced an unusable value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mdm
