#include "sddm/chain.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace sddm {

int chain_length(double kappa) {
  if (!(kappa >= 1.0))
    throw ParamError("chain_length: kappa must be at least 1");
  // tiny guard so exact powers of two do not round up on log2 noise
  double raw = std::ceil(std::log2(kChainLengthC * kappa) - 1e-12);
  return std::max(1, static_cast<int>(raw));
}

InverseChain build_chain(const Splitting& s, int d, double kappa) {
  if (d < 1) throw ParamError("build_chain: d must be at least 1");
  if (!(kappa >= 1.0)) throw ParamError("build_chain: kappa must be at least 1");
  InverseChain c;
  c.base = s;
  c.d = d;
  c.kappa_used = kappa;
  bool a_zero = s.A.size() == 0 || s.A.cwiseAbs().maxCoeff() == 0.0;
  if (a_zero || kappa == 1.0) {
    c.gamma = 0.0;
  } else {
    c.gamma = std::exp(std::exp2(d) * std::log1p(-1.0 / kappa));
  }
  c.eps_d_bound = -std::log1p(-c.gamma);
  return c;
}

ChainCertificate verify_chain(const InverseChain& c, double tol,
                              int dense_cap) {
  const int n = c.base.size();
  if (n > dense_cap)
    throw ParamError("verify_chain: dimension exceeds dense cap");
  ChainCertificate cert;
  cert.eps_d_bound = c.eps_d_bound;

  Matrix Dinv = c.base.D.cwiseInverse().asDiagonal();
  Matrix D = Matrix(c.base.D.asDiagonal());
  // Q_i = (D^{-1} A)^{2^i}; levels materialize as A_i = D Q_i
  Matrix Q = Dinv * c.base.A;
  Matrix A_prev = c.base.A;
  double scale = std::max(1.0, c.base.A.size() ? c.base.A.cwiseAbs().maxCoeff() : 0.0);
  for (int i = 1; i <= c.d; ++i) {
    Q = Q * Q;
    Matrix A_i = D * Q;
    Matrix reduced = A_prev * Dinv * A_prev;
    double dev = (A_i - reduced).cwiseAbs().maxCoeff();
    cert.recursion_dev = std::max(cert.recursion_dev, dev);
    A_prev = A_i;
  }
  if (cert.recursion_dev > tol * scale) {
    cert.failing_clause = 1;
    return cert;
  }
  // clause 2 is exact by representation: every level reuses D_0
  cert.diag_dev = 0.0;

  // clause 3: accuracy of replacing (D - A_d)^{-1} by D^{-1} at the last level
  Vector dhalf = c.base.D.cwiseSqrt().cwiseInverse();
  Matrix S = dhalf.asDiagonal() * A_prev * dhalf.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double ratio = 1.0 - es.eigenvalues()(i);
    if (!(ratio > 0.0)) {
      cert.failing_clause = 3;
      cert.measured_eps_d = std::numeric_limits<double>::infinity();
      return cert;
    }
    worst = std::max(worst, std::abs(std::log(ratio)));
  }
  cert.measured_eps_d = worst;
  cert.eps_d_small = worst < std::log(2.0) / 3.0;
  if (worst > cert.eps_d_bound + 1e-9) {
    cert.failing_clause = 3;
    return cert;
  }
  cert.ok = true;
  return cert;
}

}  // namespace sddm
