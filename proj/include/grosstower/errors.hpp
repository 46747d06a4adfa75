#pragma once

#include <stdexcept>
#include <string>

namespace grosstower {

// Bad user input or violated precondition: CLI exit code 2.
struct invalid_input : std::runtime_error {
  explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematically meaningful nonexistence (e.g. no ordinary eigensystem): exit code 3.
struct math_nonexistence : std::runtime_error {
  explicit math_nonexistence(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant violation (enumeration bug, mass mismatch, ...): exit code 4.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace grosstower
