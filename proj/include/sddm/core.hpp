#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sddm/common.hpp"
#include "sddm/graph.hpp"

namespace sddm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// Dimension up to which dense eigendecompositions are used for definiteness
// and spectral checks. Above it, validation falls back to structural rules
// and condition numbers must come from the combinatorial bound.
inline constexpr int kDenseCap = 200;

// Default tolerances, fixed project-wide.
inline constexpr double kSpectralTol = 1e-9;   // absolute, on eigenvalues
inline constexpr double kIdentityTol = 1e-10;  // relative, entrywise identities
inline constexpr double kResidualTol = 1e-10;  // relative, direct solves

struct Violation {
  int row = -1;  // -1 for whole-matrix rules
  std::string rule;
  std::string detail;
};

struct SddmCheck {
  bool ok = false;
  std::vector<Violation> violations;
  std::string summary() const;
};

// Checks symmetry-positive-definiteness, nonpositive off-diagonals and row
// diagonal dominance. Definiteness uses a dense eigensolve for n <= dense_cap
// and is skipped (dominance only) above it. Non-square or asymmetric input is
// a structural error, not a violation list.
SddmCheck validate_sddm(const MatrixRef& M, int dense_cap = kDenseCap);

// M = D - A with D = diag(M) and A the negated off-diagonal part, so A >= 0
// entrywise with a zero diagonal.
struct Splitting {
  Vector D;  // diagonal entries, all positive
  Matrix A;  // nonnegative, symmetric, zero diagonal

  int size() const { return static_cast<int>(D.size()); }
  Matrix matrix() const { return Matrix(D.asDiagonal()) - A; }
};

// Validates M and splits it. Throws InputError listing violations otherwise.
Splitting standard_splitting(const MatrixRef& M, int dense_cap = kDenseCap);

// Weighted graph Laplacian. Rejects disconnected graphs, naming components.
Matrix laplacian_matrix(const WeightedGraph& g);

// sqrt(u' M u) for PSD M; clamps roundoff-negative forms to zero and throws
// InvariantError when the form is negative beyond tolerance.
double m_norm(const MatrixRef& M, const VectorRef& u);

// ||x_star - x_tilde||_M <= eps * ||x_star||_M
bool is_eps_approx(const VectorRef& x_tilde, const VectorRef& x_star,
                   const MatrixRef& M, double eps);

// X <= Y in the semidefinite order, up to `tol` on the smallest eigenvalue.
bool loewner_leq(const MatrixRef& X, const MatrixRef& Y,
                 double tol = kSpectralTol);

// exp(-alpha) X <= Y <= exp(alpha) X
bool approx_alpha(const MatrixRef& X, const MatrixRef& Y, double alpha,
                  double tol = kSpectralTol);

// Smallest alpha with approx_alpha(X, Y, alpha) for positive definite X, Y:
// max |log lambda| over the generalized eigenvalues of (Y, X).
double measured_alpha(const MatrixRef& X, const MatrixRef& Y);

// Largest eigenvalue magnitude. Dense eigensolve for n <= dense_cap, power
// iteration above; non-convergence raises ConvergenceError carrying the last
// estimate.
double spectral_radius(const MatrixRef& M, double rtol = 1e-10,
                       int dense_cap = kDenseCap, int max_iter = 20000);

// Ratio of extreme eigenvalues of a symmetric matrix; singular Laplacians use
// the smallest nonzero eigenvalue. Requires n <= dense_cap.
double condition_number(const MatrixRef& M, int dense_cap = kDenseCap);

// Combinatorial upper bound on the condition number of the graph Laplacian
// (n^3 Wmax/Wmin), or of its grounded principal submatrix (n^4 Wmax/Wmin).
double condition_bound(const WeightedGraph& g, bool submatrix);

// One reduction D - A D^{-1} A. The result is validated; a failure to stay in
// class is an InvariantError.
Matrix reduce_step(const Splitting& s);

// Checks (D - A)^{-1} == (1/2)[D^{-1} + (I + D^{-1}A)(D - A D^{-1} A)^{-1}(I + A D^{-1})]
// entrywise to a relative tolerance. Requires n <= dense_cap.
bool check_inverse_identity(const Splitting& s, double tol = kIdentityTol,
                            int dense_cap = kDenseCap);

// Dense factorization solve with a relative residual check.
Vector direct_solve(const MatrixRef& M, const VectorRef& b);

}  // namespace sddm
