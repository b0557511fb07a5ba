#include "fluxpot/barrier.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>

#include "fluxpot/error.hpp"

namespace fluxpot {

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Newton matrix on the symmetric Schur pattern, factorized by supernodal
// Cholesky. Once that reports an indefinite matrix (huge barrier weights, or
// a faulty BLAS), LDL^T takes over for the rest of the solve, and for the rest
// of the process when the matrix was in fact positive definite. CSR of a symmetric pattern is also its CSC layout, so
// values can be written straight into Eigen's storage.
class NewtonSystem {
 public:
  explicit NewtonSystem(const QPStructure& s) : plan_(s.schur_plan()), h_(s.reduced_hessian()) {
    const auto& p = *plan_.pattern;
    std::vector<int> outer(p.row_offsets().begin(), p.row_offsets().end());
    std::vector<int> inner(p.col_indices().begin(), p.col_indices().end());
    Vector zeros(p.nnz(), 0.0);
    const auto n = static_cast<int>(p.n_rows());
    mat_ = Eigen::Map<const EigenSparse>(n, n, static_cast<int>(p.nnz()), outer.data(), inner.data(),
                                         zeros.data());
    chol_.cholmod().print = 0;
    chol_.analyzePattern(mat_);
  }

  bool factorize(std::span<const double> w) {
    double* v = mat_.valuePtr();
    std::fill(v, v + mat_.nonZeros(), 0.0);
    for (std::size_t e = 0; e < h_.nnz(); ++e) v[plan_.hessian_slot[e]] += h_.values()[e];
    for (const auto& t : plan_.terms) v[t.slot] += t.coeff * w[t.node];
    if (!use_ldlt_ && supernodal_usable.load()) {
      chol_.factorize(mat_);
      if (chol_.info() == Eigen::Success) return true;
      use_ldlt_ = true;
      if (!factorize_ldlt()) return false;
      // A positive definite matrix rejected by the supernodal code points at the BLAS underneath.
      if (ldlt_.vectorD().minCoeff() > 0.0) supernodal_usable.store(false);
      return true;
    }
    use_ldlt_ = true;
    return factorize_ldlt();
  }

  Vector solve(const Vector& rhs) const {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = use_ldlt_ ? Eigen::VectorXd(ldlt_.solve(b)) : Eigen::VectorXd(chol_.solve(b));
    return Vector(x.data(), x.data() + x.size());
  }

 private:
  const SchurPlan& plan_;
  const SparseMatrix& h_;
  bool factorize_ldlt() {
    if (!ldlt_analyzed_) {
      ldlt_.analyzePattern(mat_);
      ldlt_analyzed_ = true;
    }
    ldlt_.factorize(mat_);
    return ldlt_.info() == Eigen::Success;
  }

  static inline std::atomic<bool> supernodal_usable{true};

  EigenSparse mat_;
  Eigen::CholmodSupernodalLLT<EigenSparse, Eigen::Lower> chol_;
  Eigen::SimplicialLDLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool use_ldlt_ = false;
  bool ldlt_analyzed_ = false;
};

struct State {
  Vector x;       // free potentials
  Vector s;       // [upper - Lx; Lx - lower]
  Vector lambda;
  double f = 0.0;
  Vector grad;    // reduced gradient
};

class Problem {
 public:
  explicit Problem(const QPInstance& qp) : qp_(qp), s_(*qp.structure) {}

  void evaluate(State& st) const {
    const Vector full = s_.expand(st.x);
    const ObjectiveEval e = objective(qp_, full);
    st.f = e.value;
    st.grad = s_.restrict(e.gradient);
    const Vector lx = spmv(s_.reduced_laplacian(), st.x);
    const std::size_t m = lx.size();
    st.s.resize(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      st.s[i] = qp_.upper[i] - lx[i];
      st.s[m + i] = lx[i] - qp_.lower[i];
    }
  }

  // A^T v = L (v_hi - v_lo).
  Vector at_times(const Vector& v) const {
    const std::size_t m = s_.num_free();
    Vector d(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = v[i] - v[m + i];
    return spmv(s_.reduced_laplacian(), d);
  }

  Vector a_times(const Vector& x) const {
    const Vector lx = spmv(s_.reduced_laplacian(), x);
    const std::size_t m = lx.size();
    Vector out(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = lx[i];
      out[m + i] = -lx[i];
    }
    return out;
  }

  double dual_residual(const State& st) const {
    const Vector atl = at_times(st.lambda);
    double r = 0.0;
    for (std::size_t i = 0; i < atl.size(); ++i) r = std::max(r, std::abs(st.grad[i] + atl[i]));
    return r;
  }

  double dual_scale(const State& st) const {
    const double x = std::max(norm_inf(st.x), norm_inf(qp_.target));
    return std::max(s_.consistent_mass().norm_inf() * std::max(x, 1e-300), 1e-300);
  }

  const QPStructure& structure() const { return s_; }

 private:
  const QPInstance& qp_;
  const QPStructure& s_;
};

double complementarity_error(const State& st, double sigma) {
  double e = 0.0;
  for (std::size_t k = 0; k < st.s.size(); ++k) e = std::max(e, std::abs(st.s[k] * st.lambda[k] - sigma));
  return e;
}

double max_step(const Vector& v, const Vector& dv, double tau) {
  double a = 1.0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (dv[k] < 0.0) a = std::min(a, -tau * v[k] / dv[k]);
  return a;
}

}  // namespace

BarrierResult barrier_newton_solve(const QPInstance& qp, std::span<const double> init,
                                   const BarrierConfig& cfg) {
  const QPStructure& s = *qp.structure;
  if (init.size() != s.num_nodes()) throw ContractViolation("barrier_newton_solve: size mismatch");
  if (qp.lower.size() != s.num_free() || qp.upper.size() != s.num_free())
    throw ContractViolation("barrier_newton_solve: constraint size mismatch");
  if (!(cfg.sigma_min > 0.0) || !(cfg.sigma_shrink > 0.0 && cfg.sigma_shrink < 1.0))
    throw ContractViolation("barrier_newton_solve: invalid barrier schedule");

  Problem prob(qp);
  BarrierResult res;
  auto& rep = res.report;
  rep.objective_init = objective(qp, init).value;

  if (cfg.try_unconstrained) {
    State u;
    const Vector mt = spmv(s.consistent_mass(), qp.target);
    u.x = s.solve_hessian(s.restrict(mt));
    prob.evaluate(u);
    if (std::all_of(u.s.begin(), u.s.end(), [](double v) { return v >= 0.0; })) {
      res.udot = s.expand(u.x);
      res.lambda.assign(u.s.size(), 0.0);
      rep.unconstrained = true;
      rep.objective_final = u.f;
      rep.min_slack = *std::min_element(u.s.begin(), u.s.end());
      return res;
    }
  }

  State st;
  {
    Vector start(init.begin(), init.end());
    const Vector sl = qp.slack(start);
    if (!std::all_of(sl.begin(), sl.end(), [](double v) { return v > 0.0; })) {
      start = strictly_feasible_start(qp, start, interior_potential(qp), cfg.interior_margin);
      rep.start_repaired = true;
    }
    st.x = s.restrict(start);
  }
  prob.evaluate(st);
  if (!std::all_of(st.s.begin(), st.s.end(), [](double v) { return v > 0.0; }))
    throw SolverBreakdown("barrier_newton_solve: no strictly feasible start", 0.0, s.expand(st.x));

  double sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : std::max(1.0, st.f);
  sigma = std::max(sigma, cfg.sigma_min);
  st.lambda.resize(st.s.size());
  for (std::size_t k = 0; k < st.s.size(); ++k) st.lambda[k] = sigma / st.s[k];

  NewtonSystem sys(s);
  const std::size_t m = s.num_free();
  Vector w(m);
  rep.sigma_levels = 1;
  // The Newton matrix depends on lambda / s only, so a rejected step keeps it.
  bool factorized = false;

  while (true) {
    const bool final_level = sigma <= cfg.sigma_min * (1.0 + 1e-12);
    while (true) {
      if (rep.newton_iterations >= cfg.max_newton_iters)
        throw NotConverged("barrier_newton_solve: Newton iteration limit reached", s.expand(st.x));
      if (!factorized) {
        for (std::size_t i = 0; i < m; ++i)
          w[i] = st.lambda[i] / st.s[i] + st.lambda[m + i] / st.s[m + i];
        if (!sys.factorize(w))
          throw SolverBreakdown("barrier_newton_solve: Newton matrix factorization failed", sigma,
                                s.expand(st.x));
        factorized = true;
      }
      Vector inv(2 * m);
      for (std::size_t k = 0; k < 2 * m; ++k) inv[k] = sigma / st.s[k];
      const Vector at_inv = prob.at_times(inv);
      Vector rhs(m);
      for (std::size_t i = 0; i < m; ++i) rhs[i] = -st.grad[i] - at_inv[i];
      const Vector dx = sys.solve(rhs);
      if (!all_finite(dx))
        throw SolverBreakdown("barrier_newton_solve: non-finite Newton direction", sigma, s.expand(st.x));

      const Vector adx = prob.a_times(dx);
      Vector ds(2 * m), dl(2 * m);
      for (std::size_t k = 0; k < 2 * m; ++k) {
        ds[k] = -adx[k];
        dl[k] = inv[k] - st.lambda[k] + st.lambda[k] / st.s[k] * adx[k];
      }
      const double alpha = max_step(st.s, ds, cfg.fraction_to_boundary);
      const double beta = max_step(st.lambda, dl, cfg.fraction_to_boundary);

      State next;
      next.x = st.x;
      for (std::size_t i = 0; i < m; ++i) next.x[i] += alpha * dx[i];
      prob.evaluate(next);
      next.lambda = st.lambda;
      for (std::size_t k = 0; k < 2 * m; ++k) next.lambda[k] = std::max(st.lambda[k] + beta * dl[k], 1e-300);
      ++rep.newton_iterations;

      const bool feasible = std::all_of(next.s.begin(), next.s.end(), [](double v) { return v > 0.0; });
      const bool increases = next.f > st.f * (1.0 + 1e-12) + 1e-300;
      const bool reject = !feasible || (!final_level && increases);
      if (cfg.keep_trace)
        rep.trace.push_back({rep.newton_iterations, sigma, next.f, prob.dual_residual(next),
                             complementarity_error(next, sigma),
                             *std::min_element(next.s.begin(), next.s.end()),
                             *std::min_element(next.lambda.begin(), next.lambda.end()), alpha, beta,
                             !reject});
      if (reject) {
        if (!feasible && final_level)
          throw SolverBreakdown("barrier_newton_solve: lost strict feasibility", sigma, s.expand(st.x));
        ++rep.rejected_steps;
        break;
      }

      const double f_old = st.f;
      st = std::move(next);
      factorized = false;
      const bool centered = prob.dual_residual(st) <= cfg.dual_tol * prob.dual_scale(st) &&
                            complementarity_error(st, sigma) <= 0.5 * sigma;
      if (final_level) {
        if (centered) {
          res.udot = s.expand(st.x);
          res.lambda = st.lambda;
          rep.final_sigma = sigma;
          rep.objective_final = st.f;
          rep.min_slack = *std::min_element(st.s.begin(), st.s.end());
          for (std::size_t k = 0; k < st.s.size(); ++k)
            rep.max_complementarity = std::max(rep.max_complementarity, st.s[k] * st.lambda[k]);
          return res;
        }
      } else if (centered || st.f >= cfg.improvement * f_old) {
        break;
      }
    }
    sigma = std::max(sigma * cfg.sigma_shrink, cfg.sigma_min);
    ++rep.sigma_levels;
  }
}

void write_newton_trace(const std::vector<NewtonTraceEntry>& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_newton_trace: cannot open " + path);
  os.precision(17);
  os << "iteration,sigma,objective,dual_residual,complementarity,min_slack,min_lambda,alpha_primal,"
        "alpha_dual,accepted\n";
  for (const auto& t : trace)
    os << t.iteration << ',' << t.sigma << ',' << t.objective << ',' << t.dual_residual << ','
       << t.complementarity << ',' << t.min_slack << ',' << t.min_lambda << ',' << t.alpha_primal << ','
       << t.alpha_dual << ',' << (t.accepted ? 1 : 0) << '\n';
}

}  // namespace fluxpot
