#include "fluxpot/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "fluxpot/error.hpp"

namespace fluxpot {

SparsityPattern::SparsityPattern(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::size_t> row_offsets,
                                 std::vector<std::size_t> col_indices)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)) {
  if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size())
    throw ContractViolation("SparsityPattern: inconsistent row offsets");

  entry_rows_.resize(col_indices_.size());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= n_cols_)
        throw ContractViolation("SparsityPattern: column index out of range");
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
        throw ContractViolation("SparsityPattern: column indices must strictly increase");
      entry_rows_[k] = i;
    }
  }

  if (n_rows_ != n_cols_) return;

  diagonal_.assign(n_rows_, npos);
  for (std::size_t i = 0; i < n_rows_; ++i) diagonal_[i] = find(i, i);

  transpose_.assign(col_indices_.size(), npos);
  symmetric_ = true;
  for (std::size_t k = 0; k < col_indices_.size(); ++k) {
    const std::size_t t = find(col_indices_[k], entry_rows_[k]);
    if (t == npos) {
      symmetric_ = false;
      break;
    }
    transpose_[k] = t;
  }
  if (!symmetric_) transpose_.clear();
}

std::shared_ptr<const SparsityPattern> SparsityPattern::from_pairs(
    std::size_t n_rows, std::size_t n_cols,
    std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<std::size_t> cols;
  cols.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i >= n_rows) throw ContractViolation("SparsityPattern: row index out of range");
    ++offsets[i + 1];
    cols.push_back(j);
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return std::make_shared<const SparsityPattern>(n_rows, n_cols, std::move(offsets),
                                                 std::move(cols));
}

std::size_t SparsityPattern::find(std::size_t i, std::size_t j) const {
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return npos;
  return static_cast<std::size_t>(it - col_indices_.begin());
}

SparseMatrix::SparseMatrix(PatternPtr pattern, Vector values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_ || values_.size() != pattern_->nnz())
    throw ContractViolation("SparseMatrix: value count does not match pattern");
}

SparseMatrix::SparseMatrix(PatternPtr pattern)
    : pattern_(std::move(pattern)), values_(pattern_->nnz(), 0.0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         const std::vector<Triplet>& triplets) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols)
      throw ContractViolation("from_triplets: index out of range");
    pairs.emplace_back(t.row, t.col);
  }
  SparseMatrix m(SparsityPattern::from_pairs(n_rows, n_cols, std::move(pairs)));
  for (const auto& t : triplets) m.values_[m.pattern_->find(t.row, t.col)] += t.value;
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  Vector ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  std::iota(offsets.begin(), offsets.end(), std::size_t{0});
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  auto pattern = std::make_shared<const SparsityPattern>(n, n, std::move(offsets), std::move(cols));
  return SparseMatrix(std::move(pattern), Vector(d.begin(), d.end()));
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const {
  const std::size_t k = pattern_->find(i, j);
  return k == npos ? 0.0 : values_[k];
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::norm_inf() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = pattern_->row_begin(i); k < pattern_->row_end(i); ++k)
      s += std::abs(values_[k]);
    m = std::max(m, s);
  }
  return m;
}

Vector SparseMatrix::row_sums() const {
  Vector s(n_rows(), 0.0);
  for (std::size_t i = 0; i < n_rows(); ++i)
    for (std::size_t k = pattern_->row_begin(i); k < pattern_->row_end(i); ++k) s[i] += values_[k];
  return s;
}

Vector SparseMatrix::diagonal_values() const {
  Vector d(std::min(n_rows(), n_cols()), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
  return d;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(n_rows(), std::vector<double>(n_cols(), 0.0));
  for (std::size_t k = 0; k < nnz(); ++k) d[pattern_->row_of(k)][pattern_->col_of(k)] = values_[k];
  return d;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
    throw ContractViolation("add: dimension mismatch");
  if (a.same_pattern(b)) {
    Vector v(a.nnz());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = alpha * a.values()[k] + beta * b.values()[k];
    return SparseMatrix(a.pattern_ptr(), std::move(v));
  }
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k)
    t.push_back({a.pattern().row_of(k), a.pattern().col_of(k), alpha * a.values()[k]});
  for (std::size_t k = 0; k < b.nnz(); ++k)
    t.push_back({b.pattern().row_of(k), b.pattern().col_of(k), beta * b.values()[k]});
  return SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), t);
}

SparseMatrix scaled(const SparseMatrix& a, double alpha) {
  Vector v(a.values().begin(), a.values().end());
  for (double& x : v) x *= alpha;
  return SparseMatrix(a.pattern_ptr(), std::move(v));
}

SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom) {
  if (top.n_cols() != bottom.n_cols()) throw ContractViolation("vstack: column mismatch");
  std::vector<std::size_t> offsets(top.row_offsets().begin(), top.row_offsets().end());
  const std::size_t shift = top.nnz();
  for (std::size_t i = 1; i < bottom.row_offsets().size(); ++i)
    offsets.push_back(bottom.row_offsets()[i] + shift);
  std::vector<std::size_t> cols(top.col_indices().begin(), top.col_indices().end());
  cols.insert(cols.end(), bottom.col_indices().begin(), bottom.col_indices().end());
  Vector vals(top.values().begin(), top.values().end());
  vals.insert(vals.end(), bottom.values().begin(), bottom.values().end());
  auto pattern = std::make_shared<const SparsityPattern>(top.n_rows() + bottom.n_rows(),
                                                         top.n_cols(), std::move(offsets),
                                                         std::move(cols));
  return SparseMatrix(std::move(pattern), std::move(vals));
}

SparseMatrix submatrix(const SparseMatrix& a, std::span<const std::size_t> keep) {
  std::vector<std::size_t> new_index(std::max(a.n_rows(), a.n_cols()), npos);
  for (std::size_t r = 0; r < keep.size(); ++r) new_index[keep[r]] = r;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  Vector vals;
  for (std::size_t i : keep) {
    for (std::size_t k = a.pattern().row_begin(i); k < a.pattern().row_end(i); ++k) {
      const std::size_t j = new_index[a.pattern().col_of(k)];
      if (j == npos) continue;
      cols.push_back(j);
      vals.push_back(a.values()[k]);
    }
    offsets.push_back(cols.size());
  }
  auto pattern = std::make_shared<const SparsityPattern>(keep.size(), keep.size(),
                                                         std::move(offsets), std::move(cols));
  return SparseMatrix(std::move(pattern), std::move(vals));
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (a.n_cols() != x.size() || a.n_rows() != y.size())
    throw ContractViolation("spmv: dimension mismatch");
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  const auto n = static_cast<std::ptrdiff_t>(a.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.n_rows());
  spmv(a, x, y);
  return y;
}

Vector spmv_transpose(const SparseMatrix& a, std::span<const double> x) {
  if (a.n_rows() != x.size()) throw ContractViolation("spmv_transpose: dimension mismatch");
  Vector y(a.n_cols(), 0.0);
  for (std::size_t k = 0; k < a.nnz(); ++k)
    y[a.pattern().col_of(k)] += a.values()[k] * x[a.pattern().row_of(k)];
  return y;
}

namespace serial {

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  if (a.n_cols() != x.size()) throw ContractViolation("spmv: dimension mismatch");
  Vector y(a.n_rows(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      s += a.values()[k] * x[a.col_indices()[k]];
    y[i] = s;
  }
  return y;
}

}  // namespace serial

LaplacianCheck check_graph_laplacian(const SparseMatrix& a, int samples, unsigned seed) {
  LaplacianCheck c;
  if (a.n_rows() != a.n_cols()) return c;
  const double scale = a.max_abs();
  const auto& p = a.pattern();

  c.symmetric = true;
  c.nonpositive_offdiagonal = true;
  for (std::size_t k = 0; k < a.nnz(); ++k) {
    const std::size_t i = p.row_of(k);
    const std::size_t j = p.col_of(k);
    if (std::abs(a.values()[k] - a(j, i)) > 1e-14 * scale) c.symmetric = false;
    if (i != j && a.values()[k] > 0.0) c.nonpositive_offdiagonal = false;
  }

  const Vector rs = a.row_sums();
  for (double s : rs) c.max_row_sum = std::max(c.max_row_sum, std::abs(s));
  c.zero_row_sums = c.max_row_sum <= 1e-13 * scale;

  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(a.n_rows());
  c.min_quadratic_form = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (double& v : x) v = dist(gen);
    const Vector ax = spmv(a, x);
    c.min_quadratic_form = std::min(c.min_quadratic_form, dot(x, ax));
  }
  c.positive_semidefinite = c.min_quadratic_form >= -1e-12;
  return c;
}

void write_matrix_market(const SparseMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  os << std::setprecision(17);
  for (std::size_t k = 0; k < a.nnz(); ++k)
    os << a.pattern().row_of(k) + 1 << ' ' << a.pattern().col_of(k) + 1 << ' ' << a.values()[k]
       << '\n';
}

void write_matrix_market(const SparseMatrix& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_matrix_market(a, os);
  if (!os) throw Error("write failed for '" + path + "'");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

double sum(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fluxpot
