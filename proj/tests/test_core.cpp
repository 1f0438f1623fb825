#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "sddm/core.hpp"

using namespace sddm;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix M(2, 2);
  M << a, b, c, d;
  return M;
}

// path Laplacian plus identity, the standard small admissible instance
Matrix path3_shifted() {
  Matrix M(3, 3);
  M << 2, -1, 0, -1, 3, -1, 0, -1, 2;
  return M;
}

bool has_rule(const SddmCheck& c, int row, const std::string& rule) {
  for (const auto& v : c.violations)
    if (v.row == row && v.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("validate_sddm accepts the canonical 2x2") {
  SddmCheck c = validate_sddm(mat2(2, -1, -1, 2));
  CHECK(c.ok);
  CHECK(c.violations.empty());
  CHECK(c.summary() == "ok");
}

TEST_CASE("validate_sddm flags dominance violations by row") {
  SddmCheck c = validate_sddm(mat2(1, -2, -2, 1));
  CHECK_FALSE(c.ok);
  CHECK(has_rule(c, 0, "diagonal dominance violated"));
  CHECK(has_rule(c, 1, "diagonal dominance violated"));
}

TEST_CASE("validate_sddm flags positive off-diagonals") {
  SddmCheck c = validate_sddm(mat2(2, 1, 1, 2));
  CHECK_FALSE(c.ok);
  CHECK(has_rule(c, 0, "positive off-diagonal"));
}

TEST_CASE("validate_sddm flags indefiniteness the structural rules miss") {
  // dominance holds with equality on every row yet the matrix is singular
  Matrix L = mat2(1, -1, -1, 1);
  SddmCheck c = validate_sddm(L);
  CHECK_FALSE(c.ok);
  CHECK(has_rule(c, -1, "not positive definite"));
}

TEST_CASE("validate_sddm rejects asymmetric input structurally") {
  CHECK_THROWS_AS(validate_sddm(mat2(2, -1, 0, 2)), InputError);
  CHECK_THROWS_AS(validate_sddm(Matrix::Zero(2, 3)), InputError);
}

TEST_CASE("standard_splitting separates diagonal and off-diagonal parts") {
  Splitting s = standard_splitting(mat2(2, -1, -1, 2));
  CHECK(s.D(0) == 2.0);
  CHECK(s.D(1) == 2.0);
  CHECK(s.A(0, 0) == 0.0);
  CHECK(s.A(0, 1) == 1.0);
  CHECK(s.A(1, 0) == 1.0);
  CHECK(s.matrix() == mat2(2, -1, -1, 2));

  Matrix Dm = Matrix::Zero(2, 2);
  Dm(0, 0) = 3;
  Dm(1, 1) = 5;
  Splitting diag = standard_splitting(Dm);
  CHECK(diag.A.isZero(0.0));
  CHECK(diag.D(1) == 5.0);

  Splitting p = standard_splitting(path3_shifted());
  CHECK(p.D(0) == 2.0);
  CHECK(p.D(1) == 3.0);
  CHECK(p.D(2) == 2.0);

  CHECK_THROWS_AS(standard_splitting(mat2(1, -2, -2, 1)), InputError);
}

TEST_CASE("laplacian_matrix oracle values") {
  Matrix L1 = laplacian_matrix(WeightedGraph(2, {{0, 1, 2.0}}));
  CHECK(L1 == mat2(2, -2, -2, 2));

  Matrix L2 = laplacian_matrix(
      WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}));
  for (int i = 0; i < 3; ++i) {
    CHECK(L2(i, i) == 2.0);
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(L2(i, j) == -1.0);
  }

  // star: center accumulates the weighted degree
  Matrix L3 = laplacian_matrix(
      WeightedGraph(4, {{3, 0, 1.0}, {3, 1, 2.0}, {3, 2, 3.0}}));
  CHECK(L3(3, 3) == 6.0);
  CHECK(L3(0, 0) == 1.0);
  CHECK(L3(3, 1) == -2.0);
  CHECK(L3.rowwise().sum().isZero(1e-15));

  CHECK_THROWS_WITH_AS(
      laplacian_matrix(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}})),
      "laplacian_matrix: graph is disconnected; components: {0,1} {2,3}",
      InputError);
}

TEST_CASE("m_norm oracle values") {
  Matrix M = mat2(2, -1, -1, 2);
  Vector u(2);
  u << 1, 0;
  CHECK(m_norm(M, u) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  u << 1, 1;
  CHECK(m_norm(M, u) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(m_norm(M, Vector::Zero(2)) == 0.0);
  CHECK_THROWS_AS(m_norm(M, Vector::Zero(3)), InputError);
  CHECK_THROWS_AS(m_norm(mat2(-1, 0, 0, -1), Vector::Ones(2)), InvariantError);
}

TEST_CASE("is_eps_approx boundary behavior") {
  Matrix M = mat2(2, -1, -1, 2);
  Vector xs(2);
  xs << 1, 1;
  CHECK(is_eps_approx(xs, xs, M, 1e-12));

  // perturb one coordinate by delta: error sqrt(2) delta, reference sqrt(2)
  double delta = 1e-3;
  Vector xt = xs;
  xt(1) += delta;
  double ratio = m_norm(M, xs - xt) / m_norm(M, xs);
  CHECK(ratio == doctest::Approx(delta).epsilon(1e-9));
  CHECK(is_eps_approx(xt, xs, M, 2 * delta));
  CHECK_FALSE(is_eps_approx(xt, xs, M, delta / 2));

  // zero exact solution admits only the zero approximation
  CHECK_FALSE(is_eps_approx(xt, Vector::Zero(2), M, 0.5));
  CHECK(is_eps_approx(Vector::Zero(2), Vector::Zero(2), M, 0.5));

  CHECK_THROWS_AS(is_eps_approx(xt, xs, M, 0.0), ParamError);
}

TEST_CASE("loewner order basics") {
  Matrix I = Matrix::Identity(2, 2);
  CHECK(loewner_leq(I, 2 * I));
  CHECK_FALSE(loewner_leq(2 * I, I));
  CHECK(loewner_leq(I, I));
  CHECK_THROWS_AS(loewner_leq(I, Matrix::Identity(3, 3)), InputError);
}

TEST_CASE("approx_alpha boundary at log 2") {
  Matrix I = Matrix::Identity(2, 2);
  CHECK(approx_alpha(I, 2 * I, std::log(2.0)));
  CHECK_FALSE(approx_alpha(I, 2 * I, 0.5));
  CHECK(measured_alpha(I, 2 * I) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(measured_alpha(I, I) == doctest::Approx(0.0));
  CHECK_THROWS_AS(approx_alpha(I, 2 * I, -1.0), ParamError);
}

TEST_CASE("spectral_radius oracle values") {
  CHECK(spectral_radius(mat2(0, 1, 1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 0.3;
  D(1, 1) = -0.7;
  CHECK(spectral_radius(D) == doctest::Approx(0.7).epsilon(1e-12));

  Splitting p = standard_splitting(path3_shifted());
  Matrix W = p.D.cwiseInverse().asDiagonal() * p.A;
  CHECK(spectral_radius(W) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(spectral_radius(W) < 1.0);
}

TEST_CASE("spectral_radius power iteration above the dense cap") {
  // diagonal with a well separated top eigenvalue; sign flip checks |.|
  int n = kDenseCap + 50;
  Matrix D = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = 0.1 + 0.8 * i / (n - 1.0);
  D(n - 1, n - 1) = -3.0;
  CHECK(spectral_radius(D) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("condition_number oracle values") {
  CHECK(condition_number(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 10;
  CHECK(condition_number(D) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(condition_number(mat2(2, -1, -1, 2)) ==
        doctest::Approx(3.0).epsilon(1e-12));

  // singular Laplacian: smallest nonzero eigenvalue is used
  Matrix L(3, 3);
  L << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(condition_number(L) == doctest::Approx(3.0).epsilon(1e-9));

  CHECK_THROWS_AS(condition_number(Matrix::Identity(kDenseCap + 1, kDenseCap + 1)),
                  ParamError);
}

TEST_CASE("condition_bound formula") {
  WeightedGraph p4 = make_path(4);
  CHECK(condition_bound(p4, false) == doctest::Approx(64.0));

  WeightedGraph g3(3, {{0, 1, 5.0}, {1, 2, 1.0}});
  CHECK(condition_bound(g3, false) == doctest::Approx(135.0));

  WeightedGraph p2 = make_path(2);
  CHECK(condition_bound(p2, true) == doctest::Approx(16.0));

  CHECK_THROWS_AS(condition_bound(WeightedGraph(3, {}), false), ParamError);
}

TEST_CASE("reduce_step oracle values") {
  // pure diagonal is a fixed point
  Splitting diag;
  diag.D = Vector::Ones(3) * 4.0;
  diag.A = Matrix::Zero(3, 3);
  CHECK(reduce_step(diag) == Matrix(diag.D.asDiagonal()));

  Splitting s = standard_splitting(mat2(2, -1, -1, 2));
  Matrix R = reduce_step(s);
  CHECK(R(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(R(1, 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(R(0, 1) == doctest::Approx(0.0));

  Splitting p = standard_splitting(path3_shifted());
  Matrix Rp = reduce_step(p);
  CHECK(Rp(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(Rp(0, 2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(Rp(0, 1) == doctest::Approx(0.0));
  CHECK(validate_sddm(Rp).ok);
}

TEST_CASE("inverse identity holds exactly for diagonal and small systems") {
  Splitting diag;
  diag.D = Vector::Ones(4) * 2.0;
  diag.A = Matrix::Zero(4, 4);
  CHECK(check_inverse_identity(diag, 1e-14));

  Splitting s = standard_splitting(mat2(2, -1, -1, 2));
  CHECK(check_inverse_identity(s, 1e-12));

  Rng rng(11);
  Splitting r = standard_splitting(testhelp::random_sddm(5, rng));
  CHECK(check_inverse_identity(r, 1e-10));

  CHECK_THROWS_AS(check_inverse_identity(diag, 1e-10, 3), ParamError);
}

TEST_CASE("direct_solve oracle values") {
  Vector b(2);
  b << 1, 1;
  Vector x = direct_solve(mat2(2, -1, -1, 2), b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-13));

  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 4;
  Vector b2(2);
  b2 << 2, 4;
  Vector xd = direct_solve(D, b2);
  CHECK(xd.isApprox(Vector::Ones(2), 1e-14));

  Rng rng(5);
  Matrix M = testhelp::random_sddm(8, rng);
  Vector want = testhelp::random_vector(8, rng);
  Vector got = direct_solve(M, M * want);
  CHECK((got - want).norm() <= 1e-9 * want.norm());

  CHECK_THROWS_AS(direct_solve(mat2(2, -1, -1, 2), Vector::Zero(3)), InputError);
}

TEST_CASE("spectral approximation algebra on random instances") {
  Rng rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 2 + rng.uniform_int(0, 6);
    Matrix X = testhelp::random_spd(n, rng);
    Matrix Y = testhelp::random_spd(n, rng);
    double a = measured_alpha(X, Y);
    double pad = a + 1e-9;

    // the relation is symmetric in its arguments
    CHECK(measured_alpha(Y, X) == doctest::Approx(a).epsilon(1e-9));
    CHECK(approx_alpha(X, Y, pad));
    CHECK(approx_alpha(Y, X, pad));

    // adding a common PSD term never widens the factor
    Matrix Z = testhelp::random_spd(n, rng);
    CHECK(approx_alpha(X + Z, Y + Z, pad));

    // positive scaling is invariant
    CHECK(approx_alpha(3.5 * X, 3.5 * Y, pad));

    // composition adds exponents
    Matrix W = testhelp::random_spd(n, rng);
    double b = measured_alpha(Y, W);
    CHECK(approx_alpha(X, W, a + b + 1e-9));

    // inversion preserves the factor
    CHECK(approx_alpha(X.inverse(), Y.inverse(), pad + 1e-6));

    // congruence by any V preserves the factor
    Matrix V(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) V(i, j) = rng.normal();
    Matrix VX = V.transpose() * X * V;
    Matrix VY = V.transpose() * Y * V;
    Eigen::SelfAdjointEigenSolver<Matrix> es(VX, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() > 1e-8)
      CHECK(approx_alpha(VX, VY, pad + 1e-6));
  }
}

TEST_CASE("structural facts on a randomized corpus") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + rng.uniform_int(0, 28);
    Matrix M = testhelp::random_sddm(n, rng);
    Splitting s = standard_splitting(M);

    // splitting round trip is exact
    CHECK(s.matrix() == M);

    // one reduction stays in class and the half-sum identity holds
    CHECK_NOTHROW(reduce_step(s));
    CHECK(check_inverse_identity(s, 1e-10));

    // the one-step walk matrix contracts according to the condition number
    double kappa = condition_number(M);
    Matrix W = s.D.cwiseInverse().asDiagonal() * s.A;
    CHECK(spectral_radius(W) <= 1.0 - 1.0 / kappa + 1e-9);

    // the diagonal brackets the matrix within the contraction factor
    double rho = spectral_radius(W);
    Matrix D = Matrix(s.D.asDiagonal());
    CHECK(loewner_leq((1.0 - rho) * D, M, 1e-9));
    CHECK(loewner_leq(M, (1.0 + rho) * D, 1e-9));
  }
}
