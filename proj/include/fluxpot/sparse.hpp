#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fluxpot {

using Vector = std::vector<double>;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Compressed-row sparsity structure. Column indices are strictly increasing
/// within each row. Square, structurally symmetric patterns additionally carry
/// the position of every transposed entry, which edge-based kernels use to
/// pair g_ij with g_ji.
class SparsityPattern {
 public:
  SparsityPattern(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                  std::vector<std::size_t> col_indices);

  /// Pattern from (row, col) pairs; duplicates are merged.
  static std::shared_ptr<const SparsityPattern> from_pairs(
      std::size_t n_rows, std::size_t n_cols,
      std::vector<std::pair<std::size_t, std::size_t>> pairs);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return col_indices_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }

  std::size_t row_begin(std::size_t i) const { return row_offsets_[i]; }
  std::size_t row_end(std::size_t i) const { return row_offsets_[i + 1]; }
  /// Row index of entry k.
  std::size_t row_of(std::size_t k) const { return entry_rows_[k]; }
  std::size_t col_of(std::size_t k) const { return col_indices_[k]; }

  /// Entry index of (i, j) or npos.
  std::size_t find(std::size_t i, std::size_t j) const;
  /// Entry index of (i, i) or npos.
  std::size_t diagonal(std::size_t i) const { return diagonal_.empty() ? npos : diagonal_[i]; }
  /// Entry index of (j, i) for entry k = (i, j); only for structurally symmetric patterns.
  std::size_t transpose(std::size_t k) const { return transpose_[k]; }

  bool structurally_symmetric() const { return symmetric_; }

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<std::size_t> entry_rows_;
  std::vector<std::size_t> diagonal_;
  std::vector<std::size_t> transpose_;
  bool symmetric_ = false;
};

using PatternPtr = std::shared_ptr<const SparsityPattern>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Real CSR matrix. The pattern is shared between matrices assembled on the
/// same mesh so that linear combinations and edge loops need no index search.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(PatternPtr pattern, Vector values);
  explicit SparseMatrix(PatternPtr pattern);

  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    const std::vector<Triplet>& triplets);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> d);

  std::size_t n_rows() const { return pattern_->n_rows(); }
  std::size_t n_cols() const { return pattern_->n_cols(); }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return pattern_->row_offsets(); }
  std::span<const std::size_t> col_indices() const { return pattern_->col_indices(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  const SparsityPattern& pattern() const { return *pattern_; }
  const PatternPtr& pattern_ptr() const { return pattern_; }

  /// Value at (i, j); zero for entries outside the pattern.
  double operator()(std::size_t i, std::size_t j) const;

  double max_abs() const;
  /// Maximum absolute row sum.
  double norm_inf() const;
  Vector row_sums() const;
  Vector diagonal_values() const;

  bool same_pattern(const SparseMatrix& other) const { return pattern_ == other.pattern_; }

  std::vector<std::vector<double>> to_dense() const;

 private:
  PatternPtr pattern_;
  Vector values_;
};

/// alpha * A + beta * B on the union of both patterns (shared pattern reused).
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);
SparseMatrix scaled(const SparseMatrix& a, double alpha);
/// Vertical stack of two matrices with equal column count.
SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom);
/// Rows and columns selected by `keep` (ascending indices).
SparseMatrix submatrix(const SparseMatrix& a, std::span<const std::size_t> keep);

/// y = A x, rows distributed over OpenMP threads.
Vector spmv(const SparseMatrix& a, std::span<const double> x);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
/// y = A^T x.
Vector spmv_transpose(const SparseMatrix& a, std::span<const double> x);

namespace serial {
/// Single-threaded reference of fluxpot::spmv.
Vector spmv(const SparseMatrix& a, std::span<const double> x);
}  // namespace serial

/// Outcome of the graph Laplacian property checks.
struct LaplacianCheck {
  bool symmetric = false;
  bool zero_row_sums = false;
  bool nonpositive_offdiagonal = false;
  bool positive_semidefinite = false;
  double max_row_sum = 0.0;
  double min_quadratic_form = 0.0;

  bool ok() const {
    return symmetric && zero_row_sums && nonpositive_offdiagonal && positive_semidefinite;
  }
};

/// Checks symmetry, |row sum| <= 1e-13 max|a|, off-diagonals <= 0 and
/// x^T A x >= -1e-12 for `samples` random vectors.
LaplacianCheck check_graph_laplacian(const SparseMatrix& a, int samples = 20,
                                     unsigned seed = 12345);

/// `%%MatrixMarket matrix coordinate real general`, 1-based indices.
void write_matrix_market(const SparseMatrix& a, std::ostream& os);
void write_matrix_market(const SparseMatrix& a, const std::string& path);

// Small dense vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
double norm1(std::span<const double> a);
double sum(std::span<const double> a);
bool all_finite(std::span<const double> a);

}  // namespace fluxpot
