#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "bettilab/curve_family.hpp"
#include "bettilab/cycles.hpp"
#include "bettilab/errors.hpp"
#include "support/oracles.hpp"

using namespace bettilab;

namespace {
bool int_eq(const Eigen::MatrixXi& a, const Eigen::MatrixXi& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().sum() == 0;
}
}  // namespace

TEST_CASE("genus-1 odd model: two loops with unit pairing") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 1}, {Cplx(-1)});
  const CurveData c = curve_data(p);  // branch points -1, 0, 1 plus infinity
  const CycleBasis basis = build_cycle_basis(c);
  REQUIRE(basis.edge_cycles.size() == 2);
  CHECK(std::abs(basis.intersection(0, 1)) == 1);
  CHECK(basis.intersection(0, 0) == 0);
  CHECK(basis.intersection(1, 1) == 0);
  CHECK(int_eq(basis.transform * basis.intersection * basis.transform.transpose(),
               standard_symplectic(1)));
  CHECK(basis.conjugation_adapted);
}

TEST_CASE("five real branch points: adapted basis reduces to J_4") {
  const FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, 2}, {Cplx(2), Cplx(3), Cplx(5)});
  const CurveData c = curve_data(p);
  const CycleBasis basis = build_cycle_basis(c);
  REQUIRE(basis.edge_cycles.size() == 4);
  // path loops only meet their neighbours
  for (int k = 0; k < 4; ++k)
    for (int l = k + 1; l < 4; ++l) {
      if (l == k + 1)
        CHECK(std::abs(basis.intersection(k, l)) == 1);
      else
        CHECK(basis.intersection(k, l) == 0);
    }
  CHECK(int_eq(basis.transform * basis.intersection * basis.transform.transpose(),
               standard_symplectic(2)));
  CHECK(basis.conjugation_adapted);
}

TEST_CASE("crossing-count intersection numbers match the brute-force oracle") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 6; ++trial) {
    const int g = 1 + static_cast<int>(rng() % 3);
    const FamilyPoint p = (trial % 2 == 0) ? oracles::random_even_point(rng, g, false)
                                           : oracles::random_odd_point(rng, g, false);
    const CurveData c = curve_data(p);
    const CycleBasis basis = build_cycle_basis(c);
    const int ne = static_cast<int>(basis.edge_cycles.size());
    for (int k = 0; k < ne; ++k)
      for (int l = k + 1; l < ne; ++l) {
        const int oracle = oracles::loop_intersection_oracle(
            basis, c.branch_points, c.infinity == InfinityStructure::one_point, k, l);
        CHECK(basis.intersection(k, l) == oracle);
      }
  }
}

TEST_CASE("transform is an exact symplectic congruence on random inputs") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 8; ++trial) {
    const int g = 1 + static_cast<int>(rng() % 3);
    const FamilyPoint p = (trial % 2 == 0) ? oracles::random_even_point(rng, g, false)
                                           : oracles::random_odd_point(rng, g, true);
    const CurveData c = curve_data(p);
    const CycleBasis basis = build_cycle_basis(c);
    CHECK(int_eq(basis.transform * basis.intersection * basis.transform.transpose(),
                 standard_symplectic(g)));
    // even-degree models carry exactly one homology relation among tree loops
    if (p.model.kind == ModelKind::even_degree) {
      REQUIRE(basis.kernel.rows() == 1);
      CHECK((basis.kernel * basis.intersection).cwiseAbs().sum() == 0);
    } else {
      CHECK(basis.kernel.rows() == 0);
    }
  }
}

TEST_CASE("sheet labels and anchors are consistent") {
  std::mt19937_64 rng(4242);
  const FamilyPoint p = oracles::random_even_point(rng, 2, false);
  const CurveData c = curve_data(p);
  const CycleBasis basis = build_cycle_basis(c);
  for (const EdgeCycle& ec : basis.edge_cycles) {
    REQUIRE(ec.loop.pts.size() == ec.loop.sheet.size());
    CHECK(std::abs(ec.y_mid) > 0);
    // anchor value squares to f at the midpoint
    CHECK(std::abs(ec.y_mid * ec.y_mid - c.f.eval(ec.mid)) <
          1e-9 * (1 + std::norm(ec.y_mid)));
  }
}

TEST_CASE("alternating reduction rejects non-unimodular pairings") {
  Eigen::MatrixXi M(2, 2);
  M << 0, 2, -2, 0;
  CHECK_THROWS_AS(alternating_reduce(M), Error);
}

TEST_CASE("alternating reduction handles a kernel and signs") {
  Eigen::MatrixXi M(3, 3);
  M << 0, -1, 0, 1, 0, 1, 0, -1, 0;
  auto [T, K] = alternating_reduce(M);
  REQUIRE(T.rows() == 2);
  REQUIRE(K.rows() == 1);
  CHECK(int_eq(T * M * T.transpose(), standard_symplectic(1)));
  CHECK((K * M).cwiseAbs().sum() == 0);
}
