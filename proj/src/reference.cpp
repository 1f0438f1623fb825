#include "sddm/reference.hpp"

#include <cmath>

namespace sddm {

CrudeEngine::CrudeEngine(const InverseChain& chain) : chain_(&chain) {
  dinv_ = chain.base.D.cwiseInverse();
  qpow_.reserve(chain.d);
  Matrix Q = dinv_.asDiagonal() * chain.base.A;
  qpow_.push_back(Q);
  for (int i = 1; i < chain.d; ++i) qpow_.push_back(qpow_.back() * qpow_.back());
}

Vector CrudeEngine::solve(const VectorRef& b0) const {
  const InverseChain& c = *chain_;
  if (b0.size() != c.base.size())
    throw InputError("crude solve: dimension mismatch");
  std::vector<Vector> b(c.d + 1);
  b[0] = b0;
  // A_{i-1} D^{-1} = D (D^{-1}A)^{2^{i-1}} D^{-1}
  for (int i = 1; i <= c.d; ++i) {
    b[i] = b[i - 1] + c.base.D.asDiagonal() *
                          (qpow_[i - 1] * (dinv_.asDiagonal() * b[i - 1]));
  }
  Vector x = dinv_.asDiagonal() * b[c.d];
  for (int i = c.d - 1; i >= 0; --i) {
    x = 0.5 * (dinv_.asDiagonal() * b[i] + x + qpow_[i] * x);
  }
  return x;
}

Vector crude_solve(const InverseChain& chain, const VectorRef& b0) {
  return CrudeEngine(chain).solve(b0);
}

Matrix crude_operator(const InverseChain& chain) {
  const int n = chain.base.size();
  CrudeEngine engine(chain);
  Matrix Z(n, n);
  Vector e = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    Z.col(j) = engine.solve(e);
    e(j) = 0.0;
  }
  return Z;
}

int auto_iterations(double eps, double eps_d_bound) {
  double rho = 1.0 - std::exp(-eps_d_bound);
  if (!(rho > 0.0)) return 1;
  int q = static_cast<int>(std::ceil(std::log(2.0 / eps) / std::log(1.0 / rho)));
  return std::max(1, q);
}

RichardsonResult richardson_solve(const InverseChain& chain,
                                  const VectorRef& b0, double eps,
                                  std::optional<int> iterations) {
  if (!(eps > 0.0) || eps > 0.5)
    throw ParamError("richardson_solve: eps must lie in (0, 1/2]");
  if (!(chain.eps_d_bound < std::log(2.0) / 3.0))
    throw ParamError(
        "richardson_solve: chain accuracy bound too weak; rebuild the chain "
        "with the prescribed length");
  CrudeEngine engine(chain);
  Matrix M = chain.base.matrix();
  RichardsonResult out;
  out.iterations = iterations.value_or(auto_iterations(eps, chain.eps_d_bound));
  if (out.iterations < 1)
    throw ParamError("richardson_solve: iteration count must be positive");
  Vector chi = engine.solve(b0);
  Vector y = Vector::Zero(b0.size());
  for (int t = 0; t < out.iterations; ++t) {
    y = y - engine.solve(M * y) + chi;
    out.iterates.push_back(y);
  }
  out.x = y;
  return out;
}

}  // namespace sddm
