#pragma once

#include <span>

#include "fluxpot/sparse.hpp"

namespace fluxpot {

/// Edge values over a structurally symmetric sparsity graph, stored at the
/// off-diagonal CSR positions: entry k = (i, j) holds f_ij. Diagonal slots stay zero.
class FluxSet {
 public:
  FluxSet() = default;
  explicit FluxSet(PatternPtr pattern);
  FluxSet(PatternPtr pattern, Vector values);

  const SparsityPattern& pattern() const { return *pattern_; }
  const PatternPtr& pattern_ptr() const { return pattern_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// f_ij for a pair in the pattern (zero otherwise).
  double at(std::size_t i, std::size_t j) const;

  double max_abs() const;
  double sum_abs() const;
  /// max |f_ij + f_ji| <= tol * max|f|.
  bool antisymmetric(double tol = 1e-12) const;

  FluxSet& operator+=(const FluxSet& other);
  FluxSet& operator-=(const FluxSet& other);
  FluxSet& operator*=(double s);

 private:
  PatternPtr pattern_;
  Vector values_;
};

FluxSet operator+(FluxSet a, const FluxSet& b);
FluxSet operator-(FluxSet a, const FluxSet& b);

/// f_ij = scale * w_ij * (x_i - x_j) over the off-diagonal entries of w.
FluxSet difference_flux(const SparseMatrix& weights, std::span<const double> x, double scale = 1.0);

/// g_i = sum over off-diagonal neighbours j of f_ij.
Vector apply_fluxes(const FluxSet& f);

namespace serial {
Vector apply_fluxes(const FluxSet& f);
}  // namespace serial

}  // namespace fluxpot
