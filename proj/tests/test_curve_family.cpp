#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <complex>

#include "bettilab/curve_family.hpp"
#include "bettilab/errors.hpp"
#include "bettilab/rational.hpp"

using namespace bettilab;

TEST_CASE("odd-degree point with distinct parameters expands correctly") {
  const FamilyModel model{ModelKind::odd_degree, 2};
  const FamilyPoint p = make_point(model, {Cplx(2), Cplx(3), Cplx(5)});
  CHECK(p.all_real);
  const CurveData c = curve_data(p);
  CHECK(c.genus == 2);
  CHECK(c.infinity == InfinityStructure::one_point);
  CHECK(c.branch_points.size() == 5);
  // f = x(x-1)(x-2)(x-3)(x-5): check a value
  CHECK(std::abs(c.f.eval(Cplx(4)) - Cplx(4.0 * 3.0 * 2.0 * 1.0 * (-1.0))) < 1e-12);
  // hand oracle: f'(2) = 2 * (2-1) * (2-3) * (2-5) = 6
  CHECK(std::abs(c.fprime.eval(Cplx(2)) - Cplx(6)) < 1e-10);
}

TEST_CASE("repeated or forbidden odd-degree parameters are rejected") {
  const FamilyModel model{ModelKind::odd_degree, 2};
  CHECK_THROWS_AS(make_point(model, {Cplx(2), Cplx(2), Cplx(5)}), Error);
  CHECK_THROWS_AS(make_point(model, {Cplx(1), Cplx(3), Cplx(5)}), Error);
  CHECK_THROWS_AS(make_point(model, {Cplx(2), Cplx(3)}), Error);
  try {
    make_point(model, {Cplx(2), Cplx(2), Cplx(5)});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::invalid_param);
  }
}

TEST_CASE("even-degree quartic x^4 - 1 has the fourth roots of unity as branch points") {
  const FamilyModel model{ModelKind::even_degree, 1};
  const FamilyPoint p = make_point(model, {Cplx(-1), Cplx(0), Cplx(0), Cplx(0)});
  const CurveData c = curve_data(p);
  CHECK(c.infinity == InfinityStructure::two_points);
  REQUIRE(c.branch_points.size() == 4);
  for (const Cplx& b : c.branch_points) CHECK(std::abs(std::abs(b) - 1.0) < 1e-12);
  // f' = 4x^3, so f'(1) = 4
  CHECK(std::abs(c.fprime.eval(Cplx(1)) - Cplx(4)) < 1e-12);
}

TEST_CASE("degenerate discriminants are rejected for the even model") {
  const FamilyModel model{ModelKind::even_degree, 1};
  // x^4 (quadruple root) and (x^2-1)^2 = x^4 - 2x^2 + 1 (double roots)
  CHECK_THROWS_AS(make_point(model, {Cplx(0), Cplx(0), Cplx(0), Cplx(0)}), Error);
  CHECK_THROWS_AS(make_point(model, {Cplx(1), Cplx(0), Cplx(-2), Cplx(0)}), Error);
}

TEST_CASE("branch points satisfy |f(b)| below tolerance") {
  const FamilyModel model{ModelKind::odd_degree, 3};
  const FamilyPoint p =
      make_point(model, {Cplx(2), Cplx(0.5, 1.5), Cplx(-1, -0.3), Cplx(3.7), Cplx(-2.2, 0.9)});
  const CurveData c = curve_data(p);
  double cn = coeff_norm(c.f);
  for (const Cplx& b : c.branch_points) {
    CHECK(std::abs(c.f.eval(b)) < 1e-12 * (1.0 + cn));
    CHECK(std::abs(c.fprime.eval(b)) > 0.0);
  }
}

TEST_CASE("fprime is the exact coefficientwise derivative on rational input") {
  // rational check of the derivative and of the logarithmic-sum identity
  // f/x + f/(x-1) + sum_i f/(x-s_i) = f'
  std::vector<Rational> roots{Rational(0), Rational(1), Rational(5, 2), Rational(-3, 4),
                              Rational(7)};
  const QPoly f = QPoly::from_roots(roots.begin(), roots.end());
  const QPoly fp = f.derivative();

  QPoly sum;
  for (const auto& r : roots) {
    const QPoly lin(std::vector<Rational>{-r, Rational(1)});
    auto [q, rem] = f.divrem(lin);
    REQUIRE(rem.is_zero());
    sum = sum + q;
  }
  CHECK(sum == fp);

  // and the complex-double expansion matches the rational one
  const FamilyModel model{ModelKind::odd_degree, 2};
  const FamilyPoint p = make_point(model, {Cplx(2.5), Cplx(-0.75), Cplx(7)});
  const CurveData c = curve_data(p);
  for (int k = 0; k <= fp.degree(); ++k)
    CHECK(std::abs(c.fprime.coeff(k) - Cplx(static_cast<double>(fp.coeff(k)))) < 1e-9);
}

TEST_CASE("polynomial and rational parsing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-12") == Rational(-12));
  const QPoly f = parse_poly("x^4 - 1");
  CHECK(f.degree() == 4);
  CHECK(f.coeff(0) == Rational(-1));
  CHECK(f.coeff(4) == Rational(1));
  const QPoly g = parse_poly("2*x^3 + x - 5/3");
  CHECK(g.coeff(3) == Rational(2));
  CHECK(g.coeff(1) == Rational(1));
  CHECK(g.coeff(0) == Rational(-5, 3));
  CHECK_THROWS_AS(parse_poly("x^^2"), Error);
}
