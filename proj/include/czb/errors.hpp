#pragma once

#include <stdexcept>
#include <string>

namespace czb {

// Raised when an argument violates a module precondition. Messages are
// prefixed with the module name, e.g. "topology: ...".
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Simulator configuration that cannot be executed (e.g. a script bound to a
// correct node).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace czb
