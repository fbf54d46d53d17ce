#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "bettilab/errors.hpp"
#include "bettilab/kodaira_spencer.hpp"
#include "support/oracles.hpp"

using namespace bettilab;

TEST_CASE("the residue at s = (2,3,5), i = 0, j = 0 equals 1/3") {
  // local-expansion oracle: x - s_i ~ y^2 / f'(s_i) gives c_i = 2 / f'(s_i);
  // f'(2) = 6, so c_0 = 1/3
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  const Cplx c0 = ks_residue(p, 0, 0);
  CHECK(std::abs(c0 - Cplx(1.0 / 3.0)) < 1e-12);
  // series and contour routes agree independently
  CHECK(std::abs(ks_residue_series(p, 0, 0) - ks_residue_contour(p, 0, 0)) < 1e-12);
}

TEST_CASE("ratio law: residue(i, 1) / residue(i, 0) = s_i") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  for (int i = 0; i < 3; ++i) {
    const Cplx r0 = ks_residue(p, i, 0);
    const Cplx r1 = ks_residue(p, i, 1);
    CHECK(std::abs(r1 / r0 - p.params[i]) < 1e-10);
  }
}

TEST_CASE("odd quadratic differentials are annihilated") {
  std::mt19937_64 rng(13);
  const FamilyPoint p = oracles::random_odd_point(rng, 3, false);  // g = 3: j <= g-3 = 0 exists
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(ks_residue_odd_contour(p, i, 0)) < 1e-12);
}

TEST_CASE("dual computation agrees on random points and indices") {
  std::mt19937_64 rng(1357);
  for (int t = 0; t < 3; ++t) {
    const int g = 1 + (t % 3);
    const FamilyPoint p = oracles::random_odd_point(rng, g, false);
    for (int i = 0; i < 2 * g - 1; ++i)
      for (int j = 0; j < 2 * g - 1; ++j) {
        const Cplx a = ks_residue_series(p, i, j);
        const Cplx b = ks_residue_contour(p, i, j);
        CHECK(std::abs(a - b) < 1e-10 * (1 + std::abs(a)));
      }
  }
}

TEST_CASE("tensor structure: Vandermonde rows, closed form, rank-1 symmetric forms") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  const KSTensor T = ks_tensor(p);
  const CurveData c = curve_data(p);

  // M(i, j) = c_i s_i^j with c_i = 2 / f'(s_i)
  for (int i = 0; i < 3; ++i) {
    const Cplx ci = 2.0 / c.fprime.eval(p.params[i]);
    CHECK(std::abs(T.c(i) - ci) < 1e-12);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(T.M(i, j) - ci * std::pow(p.params[i], j)) < 1e-10);
  }

  // nonsingular: det M = c0 c1 c2 * Vandermonde(2,3,5)
  const Cplx det = T.M.determinant();
  const Cplx vdm = Cplx((3. - 2.) * (5. - 2.) * (5. - 3.));
  CHECK(std::abs(det - T.c(0) * T.c(1) * T.c(2) * vdm) < 1e-10);
  CHECK(std::abs(det) > 0);

  // each symmetric form is rank one
  for (const auto& Ti : T.symmetric_forms) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Ti);
    CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
  }
}

TEST_CASE("permuting the parameters permutes the rows") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  const FamilyPoint q = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(5), Cplx(2), Cplx(3)});
  const KSTensor Tp = ks_tensor(p);
  const KSTensor Tq = ks_tensor(q);
  // row i of q corresponds to row perm(i) of p where perm maps (5,2,3)->(2,3,5)
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    CHECK((Tq.M.row(i) - Tp.M.row(perm[i])).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact rational mode gives the Vandermonde identity on the nose") {
  const std::vector<Rational> s{Rational(2), Rational(3), Rational(5)};
  const KSTensorExact T = ks_tensor_exact(s, 2);
  CHECK(T.c[0] == Rational(1, 3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Rational sij = 1;
      for (int rep = 0; rep < j; ++rep) sij *= s[i];
      CHECK(T.M[i][j] == T.c[i] * sij);
    }
}

TEST_CASE("contracted rank: zero vector gives 0, generic and deterministic witnesses give g") {
  std::mt19937_64 rng(2468);
  for (int g = 1; g <= 3; ++g) {
    const FamilyPoint p = oracles::random_odd_point(rng, g, false);
    const KSTensor T = ks_tensor(p);
    CHECK(contracted_rank(T.symmetric_forms, Eigen::VectorXcd::Zero(g)).rank == 0);
    const MaxContractedRank mx = max_contracted_rank(T.symmetric_forms, 20, 99);
    CHECK(mx.max_rank == g);
    // the rank bound 2 min(d, g) from the Jacobian side
    CHECK(2 * mx.max_rank <= 2 * std::min(2 * g - 1, g) + 2);
  }
}

TEST_CASE("all-zero forms give max contracted rank 0") {
  std::vector<Eigen::MatrixXcd> T(3, Eigen::MatrixXcd::Zero(2, 2));
  CHECK(max_contracted_rank(T, 10, 1).max_rank == 0);
}

TEST_CASE("well-separated parameters keep the tensor well conditioned") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  const KSTensor T = ks_tensor(p);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T.M);
  CHECK(svd.singularValues()(0) / svd.singularValues()(2) < 1e10);
}

TEST_CASE("a degenerate span keeps the contracted rank below g") {
  // forms spanned by x0^2, x0 x1, x1^2, x2 x3 on C^4: every contraction is
  // singular
  std::vector<Eigen::MatrixXcd> T(4, Eigen::MatrixXcd::Zero(4, 4));
  T[0](0, 0) = 1;
  T[1](0, 1) = T[1](1, 0) = 1;
  T[2](1, 1) = 1;
  T[3](2, 3) = T[3](3, 2) = 1;
  const MaxContractedRank mx = max_contracted_rank(T, 50, 7);
  CHECK(mx.max_rank < 4);
}

TEST_CASE("error paths: even model and bad indices are rejected") {
  const FamilyPoint even =
      make_point(FamilyModel{ModelKind::even_degree, 1}, {Cplx(-1), Cplx(0), Cplx(0), Cplx(0)});
  CHECK_THROWS_AS(ks_tensor(even), Error);
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  CHECK_THROWS_AS(ks_residue(p, 3, 0), Error);
  CHECK_THROWS_AS(ks_residue(p, 0, 3), Error);
}
