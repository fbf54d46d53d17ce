#include "bettilab/torsion_pell.hpp"

#include <map>

#include "bettilab/errors.hpp"

namespace bettilab {

LaurentSeries sqrt_series(const QPoly& f, int order) {
  const int deg = f.degree();
  if (deg < 0 || deg % 2 != 0) fail(errc::odd_degree, "sqrt series needs an even-degree polynomial");
  if (f.lead() != 1) fail(errc::invalid_param, "sqrt series needs a monic polynomial");
  if (order < 0) fail(errc::invalid_param, "negative truncation order");

  // S = x^{deg/2} * c(u), u = 1/x, c^2 = F(u) with F the reversed polynomial.
  LaurentSeries s;
  s.lead = deg / 2;
  s.coeff.assign(order + 1, Rational(0));
  auto F = [&](int k) { return k <= deg ? f.coeff(deg - k) : Rational(0); };
  s.coeff[0] = 1;
  for (int k = 1; k <= order; ++k) {
    Rational acc = F(k);
    for (int j = 1; j < k; ++j) acc -= s.coeff[j] * s.coeff[k - j];
    s.coeff[k] = acc / 2;
  }
  return s;
}

namespace {

// Polynomial part of (S + b) / v. Long division only propagates downward, so
// the result needs the dividend coefficients at powers >= 0 only, no matter
// how deep the stored series runs.
QPoly partial_quotient(const LaurentSeries& S, const QPoly& b, const QPoly& v) {
  const int dv = v.degree();
  const Rational vl = v.lead();

  const int top = std::max(S.lead, b.degree());
  std::vector<Rational> num(top + 1, Rational(0));  // index = power
  for (int p = 0; p <= top; ++p) num[p] = S.at_power(p) + b.coeff(p);

  if (top < dv) return QPoly();
  std::vector<Rational> q(top - dv + 1, Rational(0));
  for (int p = top; p >= dv; --p) {
    const Rational c = num[p];
    if (c == 0) continue;
    const Rational qc = c / vl;
    q[p - dv] = qc;
    for (int j = 0; j <= dv; ++j) {
      const int pw = p - dv + j;
      if (pw <= top) num[pw] -= qc * v.coeff(j);
    }
  }
  return QPoly(std::move(q));
}

}  // namespace

std::optional<PellSolution> pell_solve(const QPoly& f, int n_max) {
  const int deg = f.degree();
  if (deg < 0 || deg % 2 != 0) fail(errc::not_even_degree, "Pell needs even degree");
  if (f.lead() != 1) fail(errc::invalid_param, "Pell needs a monic polynomial");
  if (!is_squarefree(f)) fail(errc::non_squarefree, "Pell needs a squarefree polynomial");
  const int h = deg / 2;  // g + 1
  if (n_max < h) return std::nullopt;

  // series depth: the partial quotients only read powers >= 0, i.e. the top
  // h+1 coefficients; keep a little margin
  const LaurentSeries S = sqrt_series(f, h + 4);

  // quadratic surd state: alpha_k = (sqrt(f) + b_k) / v_k
  QPoly b;                                           // b_0 = 0
  QPoly v = QPoly::constant(Rational(1));            // v_0 = 1
  QPoly p_m2, p_m1 = QPoly::constant(Rational(1));   // p_{-2} = 0, p_{-1} = 1
  QPoly q_m2 = QPoly::constant(Rational(1)), q_m1;   // q_{-2} = 1, q_{-1} = 0

  for (int k = 0;; ++k) {
    if (k > 0 && v.degree() == 0) {
      // remainder is the nonzero constant v_k: p_{k-1}, q_{k-1} solve Pell
      PellSolution sol;
      sol.P = p_m1 * (Rational(1) / p_m1.lead());  // normalize monic
      sol.Q = q_m1 * (Rational(1) / p_m1.lead());
      const QPoly r = sol.P * sol.P - f * sol.Q * sol.Q;
      if (r.degree() != 0)
        fail(errc::invalid_param, "continued fraction produced a non-constant remainder");
      sol.c = r.coeff(0);
      sol.order = sol.P.degree();
      if (sol.order > n_max) return std::nullopt;
      return sol;
    }
    const QPoly a = partial_quotient(S, b, v);
    if (a.is_zero() && k > 0) fail(errc::invalid_param, "continued fraction stalled");
    const QPoly p_new = a * p_m1 + p_m2;
    const QPoly q_new = a * q_m1 + q_m2;
    p_m2 = p_m1;
    q_m2 = q_m1;
    p_m1 = p_new;
    q_m1 = q_new;
    if (p_m1.degree() > n_max) return std::nullopt;

    // b_{k+1} = a v - b;  v_{k+1} = (f - b_{k+1}^2) / v  (exact)
    const QPoly b_next = a * v - b;
    auto [v_next, rem] = (f - b_next * b_next).divrem(v);
    if (!rem.is_zero()) fail(errc::invalid_param, "inexact division in the surd recursion");
    b = b_next;
    v = v_next;
    if (v.is_zero()) fail(errc::non_squarefree, "sqrt(f) is a polynomial");
  }
}

std::pair<FamilyPoint, PellSolution> pell_family(const QPoly& P, const Rational& p) {
  if (P.degree() < 2) fail(errc::invalid_param, "P must have degree >= 2");
  if (P.lead() != 1) fail(errc::invalid_param, "P must be monic");
  if (p == 0) fail(errc::degenerate_discriminant, "p must be nonzero");

  const QPoly f = P * P - QPoly::constant(p);
  if (!is_squarefree(f)) fail(errc::degenerate_discriminant, "P^2 - p is not squarefree");

  const int g = P.degree() - 1;
  std::vector<Cplx> params(2 * g + 2);
  for (int k = 0; k < 2 * g + 2; ++k) params[k] = Cplx(static_cast<double>(f.coeff(k)), 0.0);
  FamilyPoint fp = make_point(FamilyModel{ModelKind::even_degree, g}, std::move(params));

  PellSolution sol;
  sol.P = P;
  sol.Q = QPoly::constant(Rational(1));
  sol.c = p;
  sol.order = P.degree();
  return {fp, sol};
}

}  // namespace bettilab
