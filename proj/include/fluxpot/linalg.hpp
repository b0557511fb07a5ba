#pragma once

#include <memory>
#include <span>

#include "fluxpot/sparse.hpp"

namespace fluxpot {

/// Sparse LU factorization with partial pivoting. The factorization is bound to
/// the values it was built from; refactorize whenever they change.
class LuFactorization {
 public:
  /// Throws SingularMatrix when a pivot falls below 1e-14 max|a|.
  explicit LuFactorization(const SparseMatrix& a);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;
  LuFactorization& operator=(LuFactorization&&) noexcept;

  Vector solve(std::span<const double> b) const;
  std::size_t size() const { return n_; }
  double min_abs_pivot() const { return min_pivot_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
  double min_pivot_ = 0.0;
};

/// Solves A x = b for square nonsingular A.
Vector lu_solve(const SparseMatrix& a, std::span<const double> b);

/// Solver for the singular Neumann problem L x = rhs, sum(x) = 0 with a graph
/// Laplacian L. Uses the bordered system [[L, 1], [1^T, 0]].
class NeumannSolver {
 public:
  explicit NeumannSolver(const SparseMatrix& laplacian);

  /// Throws InconsistentRHS when |sum(rhs)| > 1e-10 ||rhs||_1.
  Vector solve(std::span<const double> rhs) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  LuFactorization lu_;
};

Vector neumann_solve(const SparseMatrix& laplacian, std::span<const double> rhs);

}  // namespace fluxpot
