#pragma once

#include <stdexcept>
#include <string>

namespace merit {

// Malformed input: bad intervals, duplicate ids, unparsable files.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// The optimizer could not certify a solution (iteration or node budget, numerics).
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

// A rule was called on data it cannot handle, e.g. a point-estimate rule without estimates.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace merit
