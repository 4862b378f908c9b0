#pragma once

#include <stdexcept>
#include <string>

namespace nrdc {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ComputationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nrdc
