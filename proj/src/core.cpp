#include "sddm/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sddm {

namespace {

void require_square_symmetric(const MatrixRef& M, const char* who) {
  if (M.rows() != M.cols())
    throw InputError(std::string(who) + ": matrix is not square");
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = i + 1; j < M.cols(); ++j)
      if (M(i, j) != M(j, i))
        throw InputError(std::string(who) + ": matrix is not symmetric at (" +
                         std::to_string(i) + "," + std::to_string(j) + ")");
}

double max_abs(const MatrixRef& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

}  // namespace

std::string SddmCheck::summary() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    const auto& v = violations[i];
    if (v.row >= 0) os << "row " << v.row << ": ";
    os << v.rule;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
  }
  return os.str();
}

SddmCheck validate_sddm(const MatrixRef& M, int dense_cap) {
  require_square_symmetric(M, "validate_sddm");
  const Eigen::Index n = M.rows();
  SddmCheck out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(M(i, i) > 0.0)) {
      out.violations.push_back({static_cast<int>(i), "nonpositive diagonal",
                                "M(i,i) = " + std::to_string(M(i, i))});
    }
    double offsum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (M(i, j) > 0.0) {
        out.violations.push_back(
            {static_cast<int>(i), "positive off-diagonal",
             "M(i," + std::to_string(j) + ") = " + std::to_string(M(i, j))});
        break;
      }
    }
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) offsum += std::abs(M(i, j));
    // small slack absorbs accumulation order differences in assembled rows
    double slack = 1e-12 * std::max(1.0, std::abs(M(i, i)) + offsum);
    if (M(i, i) + slack < offsum) {
      out.violations.push_back(
          {static_cast<int>(i), "diagonal dominance violated",
           "diag " + std::to_string(M(i, i)) + " < offdiag sum " +
               std::to_string(offsum)});
    }
  }
  if (out.violations.empty() && n > 0 && n <= dense_cap) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lmin <= 1e-12 * std::max(1.0, lmax)) {
      out.violations.push_back({-1, "not positive definite",
                                "min eigenvalue " + std::to_string(lmin)});
    }
  }
  out.ok = out.violations.empty();
  return out;
}

Splitting standard_splitting(const MatrixRef& M, int dense_cap) {
  SddmCheck check = validate_sddm(M, dense_cap);
  if (!check.ok)
    throw InputError("standard_splitting: matrix rejected: " + check.summary());
  Splitting s;
  s.D = M.diagonal();
  s.A = -M;
  s.A.diagonal().setZero();
  return s;
}

Matrix laplacian_matrix(const WeightedGraph& g) {
  auto comps = connected_components(g);
  if (comps.size() > 1) {
    std::ostringstream os;
    os << "laplacian_matrix: graph is disconnected; components:";
    for (const auto& c : comps) {
      os << " {";
      for (size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
      os << "}";
    }
    throw InputError(os.str());
  }
  Matrix L = Matrix::Zero(g.size(), g.size());
  for (const auto& e : g.edges()) {
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
  }
  return L;
}

double m_norm(const MatrixRef& M, const VectorRef& u) {
  if (M.rows() != u.size())
    throw InputError("m_norm: dimension mismatch");
  double q = u.dot(M * u);
  double scale = std::max(1.0, u.squaredNorm() * max_abs(M));
  if (q < -1e-9 * scale)
    throw InvariantError("m_norm: quadratic form is negative (" +
                         std::to_string(q) + "); matrix is not PSD");
  return std::sqrt(std::max(q, 0.0));
}

bool is_eps_approx(const VectorRef& x_tilde, const VectorRef& x_star,
                   const MatrixRef& M, double eps) {
  if (!(eps > 0.0)) throw ParamError("is_eps_approx: eps must be positive");
  double err = m_norm(M, x_star - x_tilde);
  double ref = m_norm(M, x_star);
  return err <= eps * ref;
}

bool loewner_leq(const MatrixRef& X, const MatrixRef& Y, double tol) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw InputError("loewner_leq: dimension mismatch");
  Matrix diff = Y - X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

bool approx_alpha(const MatrixRef& X, const MatrixRef& Y, double alpha,
                  double tol) {
  if (alpha < 0.0) throw ParamError("approx_alpha: alpha must be nonnegative");
  return loewner_leq(std::exp(-alpha) * X, Y, tol) &&
         loewner_leq(Y, std::exp(alpha) * X, tol);
}

double measured_alpha(const MatrixRef& X, const MatrixRef& Y) {
  if (X.rows() != Y.rows())
    throw InputError("measured_alpha: dimension mismatch");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(Y, X);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (!(lam > 0.0))
      throw InvariantError(
          "measured_alpha: pencil has a nonpositive eigenvalue");
    worst = std::max(worst, std::abs(std::log(lam)));
  }
  return worst;
}

double spectral_radius(const MatrixRef& M, double rtol, int dense_cap,
                       int max_iter) {
  if (M.rows() != M.cols())
    throw InputError("spectral_radius: matrix is not square");
  const Eigen::Index n = M.rows();
  if (n == 0) return 0.0;
  if (n <= dense_cap) {
    Eigen::EigenSolver<Matrix> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // power iteration on M^2 so that +/- dominant pairs still converge
  Rng rng(0x5eed5eedULL);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = M * (M * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    double est = std::sqrt(nw);
    w /= nw;
    if (it > 0 && std::abs(est - prev) <= rtol * std::max(est, 1e-300)) {
      return est;
    }
    prev = est;
    v = w;
  }
  throw ConvergenceError("spectral_radius: power iteration did not converge",
                         prev);
}

double condition_number(const MatrixRef& M, int dense_cap) {
  require_square_symmetric(M, "condition_number");
  if (M.rows() > dense_cap)
    throw ParamError(
        "condition_number: dimension exceeds dense cap; use condition_bound");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  Vector abs = es.eigenvalues().cwiseAbs();
  double lmax = abs.maxCoeff();
  if (lmax == 0.0)
    throw InvariantError("condition_number: zero matrix");
  // singular Laplacians: ignore the (numerically) zero eigenvalue
  double lmin = lmax;
  for (Eigen::Index i = 0; i < abs.size(); ++i)
    if (abs(i) > 1e-9 * lmax) lmin = std::min(lmin, abs(i));
  return lmax / lmin;
}

double condition_bound(const WeightedGraph& g, bool submatrix) {
  if (g.size() < 1 || g.edges().empty())
    throw ParamError("condition_bound: graph has no edges");
  double n = static_cast<double>(g.size());
  double base = n * n * n * (submatrix ? n : 1.0);
  return base * g.max_weight() / g.min_weight();
}

Matrix reduce_step(const Splitting& s) {
  Matrix P = s.A * s.D.cwiseInverse().asDiagonal() * s.A;
  // symmetric in exact arithmetic; rounding can leave a last-ulp skew that
  // the strict validator would reject
  P = 0.5 * (P + P.transpose()).eval();
  Matrix R = Matrix(s.D.asDiagonal()) - P;
  SddmCheck check = validate_sddm(R);
  if (!check.ok)
    throw InvariantError("reduce_step: result left the class: " +
                         check.summary());
  return R;
}

bool check_inverse_identity(const Splitting& s, double tol, int dense_cap) {
  const int n = s.size();
  if (n > dense_cap)
    throw ParamError("check_inverse_identity: dimension exceeds dense cap");
  Matrix I = Matrix::Identity(n, n);
  Matrix Dinv = s.D.cwiseInverse().asDiagonal();
  Matrix M = s.matrix();
  Matrix lhs = M.ldlt().solve(I);
  Matrix reduced = Matrix(s.D.asDiagonal()) - s.A * Dinv * s.A;
  Matrix inner = reduced.ldlt().solve(I + s.A * Dinv);
  Matrix rhs = 0.5 * (Dinv + (I + Dinv * s.A) * inner);
  double scale = std::max({1.0, max_abs(lhs), max_abs(rhs)});
  return (lhs - rhs).cwiseAbs().maxCoeff() <= tol * scale;
}

Vector direct_solve(const MatrixRef& M, const VectorRef& b) {
  if (M.rows() != M.cols() || M.rows() != b.size())
    throw InputError("direct_solve: dimension mismatch");
  auto residual_ok = [&](const Vector& x) {
    double r = (M * x - b).norm();
    return r <= kResidualTol * std::max(b.norm(), 1e-300);
  };
  Vector x = M.ldlt().solve(b);
  if (residual_ok(x)) return x;
  x = M.colPivHouseholderQr().solve(b);
  if (residual_ok(x)) return x;
  throw InvariantError(
      "direct_solve: residual check failed (singular or ill-conditioned)");
}

}  // namespace sddm
