#pragma once

#include "sddm/core.hpp"

namespace sddm {

// Safety factor in the chain length rule d = ceil(log2(c * kappa)). With
// c = 4 the last level's accuracy bound is at most log(1/(1 - e^-4)), about
// 0.0185, comfortably under the (1/3) log 2 threshold the refinement loop
// requires.
inline constexpr int kChainLengthC = 4;

// Matrix chain D_0 - A_0, D_1 - A_1, ... built by repeated reduction, stored
// implicitly: every level shares D_0 and A_i = D_0 (D_0^{-1} A_0)^{2^i}.
// gamma = (1 - 1/kappa)^{2^d} bounds the spectral radius of D_0^{-1} A_d, and
// eps_d_bound = log(1/(1-gamma)) the accuracy of the last level.
struct InverseChain {
  Splitting base;
  int d = 0;
  double kappa_used = 1.0;
  double gamma = 0.0;
  double eps_d_bound = 0.0;
};

// d = max(1, ceil(log2(c * kappa)))
int chain_length(double kappa);

InverseChain build_chain(const Splitting& s, int d, double kappa);

struct ChainCertificate {
  bool ok = false;
  int failing_clause = 0;  // 0 when ok; otherwise 1..3
  double recursion_dev = 0.0;  // clause 1: worst |A_i - A_{i-1} D^{-1} A_{i-1}|
  double diag_dev = 0.0;       // clause 2: worst |D_i - D_0| (identically 0 here)
  double measured_eps_d = 0.0;  // clause 3: exact accuracy of the last level
  double eps_d_bound = 0.0;
  bool eps_d_small = false;  // measured_eps_d < (1/3) log 2
};

// Materializes the chain densely and checks the defining clauses:
// (1) each level equals the reduction of the previous one, entrywise to tol,
// (2) all diagonals equal D_0,
// (3) the last level's measured accuracy does not exceed the analytic bound.
// Requires n <= dense_cap.
ChainCertificate verify_chain(const InverseChain& c, double tol = 1e-12,
                              int dense_cap = kDenseCap);

}  // namespace sddm
