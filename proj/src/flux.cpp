#include "fluxpot/flux.hpp"

#include <algorithm>
#include <cmath>

#include "fluxpot/error.hpp"

namespace fluxpot {

FluxSet::FluxSet(PatternPtr pattern) : pattern_(std::move(pattern)), values_(pattern_->nnz(), 0.0) {
  if (!pattern_->structurally_symmetric())
    throw ContractViolation("FluxSet: pattern must be structurally symmetric");
}

FluxSet::FluxSet(PatternPtr pattern, Vector values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_->structurally_symmetric())
    throw ContractViolation("FluxSet: pattern must be structurally symmetric");
  if (values_.size() != pattern_->nnz()) throw ContractViolation("FluxSet: size mismatch");
}

double FluxSet::at(std::size_t i, std::size_t j) const {
  const std::size_t k = pattern_->find(i, j);
  return k == npos ? 0.0 : values_[k];
}

double FluxSet::max_abs() const { return norm_inf(values_); }
double FluxSet::sum_abs() const { return norm1(values_); }

bool FluxSet::antisymmetric(double tol) const {
  const double scale = max_abs();
  for (std::size_t k = 0; k < values_.size(); ++k)
    if (std::abs(values_[k] + values_[pattern_->transpose(k)]) > tol * scale) return false;
  return true;
}

FluxSet& FluxSet::operator+=(const FluxSet& other) {
  if (pattern_ != other.pattern_) throw ContractViolation("FluxSet: pattern mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

FluxSet& FluxSet::operator-=(const FluxSet& other) {
  if (pattern_ != other.pattern_) throw ContractViolation("FluxSet: pattern mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

FluxSet& FluxSet::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

FluxSet operator+(FluxSet a, const FluxSet& b) { return a += b; }
FluxSet operator-(FluxSet a, const FluxSet& b) { return a -= b; }

FluxSet difference_flux(const SparseMatrix& weights, std::span<const double> x, double scale) {
  if (weights.n_rows() != x.size()) throw ContractViolation("difference_flux: size mismatch");
  FluxSet f(weights.pattern_ptr());
  const auto& p = weights.pattern();
  const auto w = weights.values();
  const auto n = static_cast<std::ptrdiff_t>(p.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::size_t k = p.row_begin(i); k < p.row_end(i); ++k) {
      const std::size_t j = p.col_of(k);
      if (j != static_cast<std::size_t>(i)) f[k] = scale * w[k] * (x[i] - x[j]);
    }
  return f;
}

Vector apply_fluxes(const FluxSet& f) {
  const auto& p = f.pattern();
  Vector g(p.n_rows(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(p.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = p.row_begin(i); k < p.row_end(i); ++k)
      if (p.col_of(k) != static_cast<std::size_t>(i)) s += f[k];
    g[i] = s;
  }
  return g;
}

namespace serial {

Vector apply_fluxes(const FluxSet& f) {
  const auto& p = f.pattern();
  Vector g(p.n_rows(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (p.row_of(k) != p.col_of(k)) g[p.row_of(k)] += f[k];
  return g;
}

}  // namespace serial

}  // namespace fluxpot
