#ifndef SPALF_ERRORS_HPP
#define SPALF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spalf {

// Thrown when an iterative numeric procedure fails to reach its tolerance.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation exceeds a declared enumeration/iteration budget.
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spalf

#endif
