#include "fluxpot/linalg.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "fluxpot/error.hpp"

namespace fluxpot {

namespace {

using EigenMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Exposes the diagonal of U, which SparseLU keeps inside the supernodal L store.
class PivotedLU : public Eigen::SparseLU<EigenMatrix, Eigen::COLAMDOrdering<int>> {
 public:
  double min_abs_pivot() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols(); ++j) {
      double d = 0.0;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
        if (it.index() == j) {
          d = std::abs(it.value());
          break;
        }
      }
      m = std::min(m, d);
    }
    return m;
  }
};

EigenMatrix to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k)
    t.emplace_back(static_cast<int>(a.pattern().row_of(k)), static_cast<int>(a.pattern().col_of(k)),
                   a.values()[k]);
  EigenMatrix m(static_cast<int>(a.n_rows()), static_cast<int>(a.n_cols()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

struct LuFactorization::Impl {
  PivotedLU lu;
};

LuFactorization::LuFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.n_rows() != a.n_cols()) throw ContractViolation("lu: matrix must be square");
  n_ = a.n_rows();
  const double scale = a.max_abs();
  if (n_ == 0) return;
  if (scale == 0.0) throw SingularMatrix("lu: zero matrix");
  const EigenMatrix m = to_eigen(a);
  impl_->lu.analyzePattern(m);
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrix("lu: factorization failed (" + impl_->lu.lastErrorMessage() + ")");
  min_pivot_ = impl_->lu.min_abs_pivot();
  if (!(min_pivot_ >= 1e-14 * scale))
    throw SingularMatrix("lu: pivot below 1e-14 max|a|");
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;
LuFactorization& LuFactorization::operator=(LuFactorization&&) noexcept = default;

Vector LuFactorization::solve(std::span<const double> b) const {
  if (b.size() != n_) throw ContractViolation("lu solve: dimension mismatch");
  if (n_ == 0) return {};
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(n_));
  const Eigen::VectorXd x = impl_->lu.solve(rhs);
  return Vector(x.data(), x.data() + x.size());
}

Vector lu_solve(const SparseMatrix& a, std::span<const double> b) {
  if (a.n_cols() != b.size()) throw ContractViolation("lu_solve: dimension mismatch");
  return LuFactorization(a).solve(b);
}

namespace {

SparseMatrix bordered(const SparseMatrix& l) {
  if (l.n_rows() != l.n_cols()) throw ContractViolation("neumann: matrix must be square");
  const std::size_t n = l.n_rows();
  std::vector<Triplet> t;
  t.reserve(l.nnz() + 2 * n);
  for (std::size_t k = 0; k < l.nnz(); ++k)
    t.push_back({l.pattern().row_of(k), l.pattern().col_of(k), l.values()[k]});
  // Border scaled like the matrix entries to keep pivots balanced.
  const double w = std::max(l.max_abs(), 1e-300);
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, n, w});
    t.push_back({n, i, w});
  }
  return SparseMatrix::from_triplets(n + 1, n + 1, t);
}

}  // namespace

NeumannSolver::NeumannSolver(const SparseMatrix& laplacian)
    : n_(laplacian.n_rows()), lu_(bordered(laplacian)) {}

Vector NeumannSolver::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw ContractViolation("neumann_solve: dimension mismatch");
  const double total = sum(rhs);
  if (std::abs(total) > 1e-10 * norm1(rhs))
    throw InconsistentRHS("neumann_solve: right-hand side does not sum to zero");
  Vector b(rhs.begin(), rhs.end());
  b.push_back(0.0);
  Vector x = lu_.solve(b);
  x.pop_back();
  return x;
}

Vector neumann_solve(const SparseMatrix& laplacian, std::span<const double> rhs) {
  return NeumannSolver(laplacian).solve(rhs);
}

}  // namespace fluxpot
