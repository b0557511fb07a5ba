#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fluxpot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or other violated precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Right-hand side of a singular Laplacian system is not orthogonal to its kernel.
class InconsistentRHS : public Error {
 public:
  using Error::Error;
};

/// The residual distribution has no admissible node to receive the residual.
class InfeasibleBackup : public Error {
 public:
  using Error::Error;
};

class SolverBreakdown : public Error {
 public:
  SolverBreakdown(const std::string& what, double sigma, std::vector<double> iterate)
      : Error(what), sigma_(sigma), iterate_(std::move(iterate)) {}

  double sigma() const { return sigma_; }
  const std::vector<double>& iterate() const { return iterate_; }

 private:
  double sigma_;
  std::vector<double> iterate_;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::vector<double> best_feasible)
      : Error(what), best_(std::move(best_feasible)) {}

  const std::vector<double>& best_feasible() const { return best_; }

 private:
  std::vector<double> best_;
};

class Diverged : public Error {
 public:
  using Error::Error;
};

/// Failure inside a benchmark run, tagged with the time step it occurred in.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, int step, bool solver)
      : Error(what), step_(step), solver_(solver) {}

  int step() const { return step_; }
  /// True when the cause was a linear or barrier solver failure.
  bool solver() const { return solver_; }

 private:
  int step_;
  bool solver_;
};

}  // namespace fluxpot
