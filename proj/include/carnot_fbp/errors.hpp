#pragma once

#include <stdexcept>
#include <string>

namespace cfbp {

/// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of an iterative solver.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IterationLimit : public SolverError {
public:
  using SolverError::SolverError;
};

/// A field that must stay positive lost positivity at some interior node.
class PositivityViolation : public SolverError {
public:
  PositivityViolation(const std::string& what, std::size_t node, double value)
      : SolverError(what), node_(node), value_(value) {}
  std::size_t node() const noexcept { return node_; }
  double value() const noexcept { return value_; }

private:
  std::size_t node_;
  double value_;
};

/// Line search could not reduce the energy.
class Stagnation : public SolverError {
public:
  using SolverError::SolverError;
};

/// Mountain-pass geometry is missing (no separating ridge, path collapse).
class GeometryFailure : public SolverError {
public:
  using SolverError::SolverError;
};

/// Shooting oracle found no bracket / no matching.
class NoSolution : public SolverError {
public:
  using SolverError::SolverError;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfbp
