#pragma once

#include <optional>
#include <vector>

#include "sddm/chain.hpp"

namespace sddm {

// Centralized chain solver. Precomputes the dense powers (D^{-1}A)^{2^i} once
// so repeated right-hand sides amortize; solve() applies the forward pass
// b_i = (I + A_{i-1} D^{-1}) b_{i-1}, the top-level solve x_d = D^{-1} b_d,
// and the backward pass x_i = (1/2)(D^{-1} b_i + (I + D^{-1} A_i) x_{i+1}).
class CrudeEngine {
 public:
  explicit CrudeEngine(const InverseChain& chain);
  Vector solve(const VectorRef& b0) const;
  const InverseChain& chain() const { return *chain_; }

 private:
  const InverseChain* chain_;
  Vector dinv_;
  std::vector<Matrix> qpow_;  // (D^{-1}A)^{2^i}, i = 0..d-1
};

// One application of the chain solver: a linear, symmetric operator that
// approximates M^{-1} to the chain's accuracy.
Vector crude_solve(const InverseChain& chain, const VectorRef& b0);

// The operator matrix itself, assembled column by column. Test-scale only.
Matrix crude_operator(const InverseChain& chain);

// Iteration count for the preconditioned refinement loop: smallest q with
// rho^q <= eps/2 where rho = 1 - exp(-eps_d_bound), at least 1.
int auto_iterations(double eps, double eps_d_bound);

struct RichardsonResult {
  Vector x;
  int iterations = 0;
  std::vector<Vector> iterates;  // y_1 .. y_q
};

// Preconditioned Richardson refinement: y_t = y_{t-1} - Z(M y_{t-1}) + Z b_0
// with Z the crude operator. eps must lie in (0, 1/2]; the chain's accuracy
// bound must be below (1/3) log 2 or the contraction is not certified.
RichardsonResult richardson_solve(const InverseChain& chain, const VectorRef& b0,
                                  double eps,
                                  std::optional<int> iterations = std::nullopt);

}  // namespace sddm
