#pragma once

#include <stdexcept>
#include <string>

namespace nst {

// Caller supplied something that violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Weight container is malformed or does not match the expected architecture.
class LoadError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// File could not be read, decoded or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Objective produced a non-finite value during optimization.
class OptimizationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace nst
