#include "bettilab/kodaira_spencer.hpp"

#include <cmath>
#include <random>

#include "bettilab/errors.hpp"
#include "bettilab/quadrature.hpp"

namespace bettilab {

namespace {

// Dense truncated power series a_0 + a_1 y + ... + a_n y^n over a field.
template <class C>
struct Series {
  std::vector<C> a;

  explicit Series(int order) : a(order + 1, C(0)) {}
  int order() const { return static_cast<int>(a.size()) - 1; }

  static Series mul(const Series& x, const Series& y) {
    Series r(x.order());
    for (int i = 0; i <= x.order(); ++i) {
      if (x.a[i] == C(0)) continue;
      for (int j = 0; i + j <= x.order(); ++j) r.a[i + j] += x.a[i] * y.a[j];
    }
    return r;
  }
  // 1 / x, requires x.a[0] != 0
  static Series inverse(const Series& x) {
    Series r(x.order());
    r.a[0] = C(1) / x.a[0];
    for (int n = 1; n <= x.order(); ++n) {
      C acc = C(0);
      for (int j = 1; j <= n; ++j) acc += x.a[j] * r.a[n - j];
      r.a[n] = -acc / x.a[0];
    }
    return r;
  }
  Series derivative() const {
    Series r(order());
    for (int n = 1; n <= order(); ++n) r.a[n - 1] = a[n] * C(n);
    return r;
  }
};

void check_odd_model(const FamilyPoint& p, int i, int j) {
  if (p.model.kind != ModelKind::odd_degree)
    fail(errc::invalid_param, "Kodaira-Spencer residues are defined for the odd-degree model");
  const int d = 2 * p.model.genus - 1;
  if (i < 0 || i >= d || j < 0 || j >= d) fail(errc::invalid_param, "index out of range");
}

// x(y) = s_i + sum e_k y^k solving f(x(y)) = y^2, plus the pieces of the
// contracted 1-form; shared by the exact and floating series routes.
template <class C>
C residue_series_impl(const std::vector<C>& taylor_f, const C& si, int j, int order) {
  // t(y) with f(s_i + t) = y^2; f_1 = taylor_f[1] != 0
  Series<C> t(order);
  const C f1 = taylor_f[1];
  for (int n = 2; n <= order; ++n) {
    // coefficient of y^n in sum_{m>=2} f_m t^m, using e_k for k < n
    C acc = C(0);
    Series<C> tp = t;  // t^m accumulated
    for (int m = 2; m < static_cast<int>(taylor_f.size()); ++m) {
      tp = Series<C>::mul(tp, t);
      if (n <= tp.order()) acc += taylor_f[m] * tp.a[n];
    }
    C rhs = (n == 2) ? C(1) : C(0);
    t.a[n] = (rhs - acc) / f1;
  }

  // numerator x^j * dx/dy; denominator h(x) * (x - s_i) with h = f'
  Series<C> xj(order);
  xj.a[0] = C(1);
  {
    Series<C> x = t;
    x.a[0] += si;
    for (int rep = 0; rep < j; ++rep) xj = Series<C>::mul(xj, x);
  }
  const Series<C> num = Series<C>::mul(xj, t.derivative());

  Series<C> h(order);  // f'(s_i + t) = sum (m+1) f_{m+1} t^m
  {
    Series<C> tp(order);
    tp.a[0] = C(1);
    for (int m = 0; m + 1 < static_cast<int>(taylor_f.size()); ++m) {
      if (m > 0) tp = Series<C>::mul(tp, t);
      for (int n = 0; n <= order; ++n)
        if (tp.a[n] != C(0)) h.a[n] += C(m + 1) * taylor_f[m + 1] * tp.a[n];
    }
  }
  const Series<C> den = Series<C>::mul(h, t);

  // den has valuation 2 (h(0) f_1^{-1} ... t ~ y^2 / f_1); shift and invert
  Series<C> den_shift(order);
  for (int n = 0; n + 2 <= order; ++n) den_shift.a[n] = den.a[n + 2];
  if (den_shift.a[0] == C(0)) fail(errc::residue_disagreement, "degenerate local expansion");
  const Series<C> ratio = Series<C>::mul(num, Series<C>::inverse(den_shift));
  // residue = coefficient of y^{-1} = coefficient of y^1 in num/den_shift
  return ratio.a[1];
}

// coefficients of f(s + t) in t, by repeated synthetic division
std::vector<Cplx> taylor_at(const Poly& f, const Cplx& s) {
  std::vector<Cplx> c = f.coeffs();
  const int n = static_cast<int>(c.size());
  std::vector<Cplx> out(n);
  for (int k = 0; k < n; ++k) {
    for (int i = n - 2; i >= k; --i) c[i] += s * c[i + 1];
    out[k] = c[k];
  }
  return out;
}

}  // namespace

Cplx ks_residue_series(const FamilyPoint& p, int i, int j) {
  check_odd_model(p, i, j);
  const Poly f = family_poly(p.model, p.params);
  const Cplx si = p.params[i];
  const int order = 2 * p.model.genus + 8;

  std::vector<Cplx> tf = taylor_at(f, si);
  if (std::abs(tf[0]) > 1e-10 * (1 + coeff_norm(f)))
    fail(errc::invalid_param, "s_i is not a branch point");
  tf[0] = 0;
  return residue_series_impl<Cplx>(tf, si, j, order);
}

Cplx ks_residue_contour(const FamilyPoint& p, int i, int j) {
  check_odd_model(p, i, j);
  const Poly f = family_poly(p.model, p.params);
  const Poly h = f.derivative();
  const Cplx si = p.params[i];

  double min_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(p.params.size()); ++k)
    if (k != i) min_d = std::min(min_d, std::abs(p.params[k] - si));
  min_d = std::min({min_d, std::abs(si), std::abs(si - Cplx(1))});
  const double r = 1e-2 * min_d;

  // curve-circle residue: x winds twice; with dx = i (x - s_i) dtheta the
  // integrand is i x^j / f'(x), smooth and periodic, so the trapezoid sum is
  // spectrally accurate
  const int N = 128;
  Cplx acc(0);
  for (int k = 0; k < N; ++k) {
    const double th = 4.0 * M_PI * k / N;
    const Cplx x = si + std::polar(r, th);
    acc += Cplx(0, 1) * std::pow(x, j) / h.eval(x) * (4.0 * M_PI / N);
  }
  return acc / Cplx(0, 2 * M_PI);
}

Cplx ks_residue_odd_contour(const FamilyPoint& p, int i, int j) {
  check_odd_model(p, i, j);
  const Poly f = family_poly(p.model, p.params);
  const Poly df = f.derivative();
  const Cplx si = p.params[i];

  double min_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(p.params.size()); ++k)
    if (k != i) min_d = std::min(min_d, std::abs(p.params[k] - si));
  min_d = std::min({min_d, std::abs(si), std::abs(si - Cplx(1))});
  const double r = 1e-2 * min_d;

  // same theta substitution as the even route; here y rides along and the
  // integrand i x^j y / f'(x) stays smooth and 4pi-periodic on the curve
  const int N = 256;
  Cplx acc(0);
  Cplx x_prev = si + Cplx(r, 0);
  Cplx y = std::sqrt(f.eval(x_prev));
  const Cplx y0 = y;
  acc += Cplx(0, 1) * std::pow(x_prev, j) * y / df.eval(x_prev) * (4.0 * M_PI / N);
  for (int k = 1; k < N; ++k) {
    const double th = 4.0 * M_PI * k / N;
    const Cplx x = si + std::polar(r, th);
    y = quad::continue_branch<Cplx>(f, df, x_prev, y, x);
    acc += Cplx(0, 1) * std::pow(x, j) * y / df.eval(x) * (4.0 * M_PI / N);
    x_prev = x;
  }
  // closing consistency: after 4pi the tracked branch must return
  y = quad::continue_branch<Cplx>(f, df, x_prev, y, si + Cplx(r, 0));
  if (std::abs(y - y0) > 1e-6 * (1 + std::abs(y0)))
    fail(errc::residue_disagreement, "branch did not close around the residue contour");
  return acc / Cplx(0, 2 * M_PI);
}

Cplx ks_residue(const FamilyPoint& p, int i, int j) {
  const Cplx a = ks_residue_series(p, i, j);
  const Cplx b = ks_residue_contour(p, i, j);
  if (std::abs(a - b) > 1e-10 * (1 + std::abs(a)))
    fail(errc::residue_disagreement, "series and contour residues disagree");
  return a;
}

KSTensor ks_tensor(const FamilyPoint& p) {
  if (p.model.kind != ModelKind::odd_degree)
    fail(errc::invalid_param, "Kodaira-Spencer tensor needs the odd-degree model");
  const int g = p.model.genus;
  const int d = 2 * g - 1;

  KSTensor out;
  out.point = p;
  out.M.resize(d, d);
  out.c.resize(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.M(i, j) = ks_residue(p, i, j);
  for (int i = 0; i < d; ++i) out.c(i) = out.M(i, 0);

  out.symmetric_forms.resize(d);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXcd T(g, g);
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b) T(a, b) = out.M(i, a + b);
    out.symmetric_forms[i] = T;
  }
  return out;
}

KSTensorExact ks_tensor_exact(const std::vector<Rational>& s, int genus) {
  const int d = 2 * genus - 1;
  if (static_cast<int>(s.size()) != d) fail(errc::invalid_param, "expected 2g-1 parameters");

  // f = x(x-1) prod (x - s_i) over Q
  std::vector<Rational> roots;
  roots.push_back(Rational(0));
  roots.push_back(Rational(1));
  for (const auto& v : s) roots.push_back(v);
  QPoly f = QPoly::from_roots(roots.begin(), roots.end());

  KSTensorExact out;
  out.M.assign(d, std::vector<Rational>(d));
  out.c.assign(d, Rational(0));
  const int order = 2 * genus + 8;
  for (int i = 0; i < d; ++i) {
    // Taylor coefficients of f at s_i via divrem by (x - s_i)
    std::vector<Rational> tf;
    QPoly cur = f;
    const QPoly lin(std::vector<Rational>{-s[i], Rational(1)});
    while (!cur.is_zero()) {
      auto [q, r] = cur.divrem(lin);
      tf.push_back(r.is_zero() ? Rational(0) : r.coeff(0));
      cur = q;
    }
    if (tf.empty() || tf[0] != 0) fail(errc::invalid_param, "s_i is not a root of f");
    for (int j = 0; j < d; ++j)
      out.M[i][j] = residue_series_impl<Rational>(tf, s[i], j, order);
    out.c[i] = out.M[i][0];
  }
  return out;
}

RankResult contracted_rank(const std::vector<Eigen::MatrixXcd>& T, const Eigen::VectorXcd& omega) {
  const int d = static_cast<int>(T.size());
  const int g = d > 0 ? static_cast<int>(T[0].rows()) : 0;
  Eigen::MatrixXcd A(d, g);
  for (int i = 0; i < d; ++i) A.row(i) = (T[i] * omega).transpose();
  return rank_with_gap(A);
}

MaxContractedRank max_contracted_rank(const std::vector<Eigen::MatrixXcd>& T, int n_trials,
                                      std::uint64_t seed) {
  const int g = T.empty() ? 0 : static_cast<int>(T[0].rows());
  MaxContractedRank out;
  if (g == 0) return out;

  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(g);
  e0(0) = 1;
  out.max_rank = contracted_rank(T, e0).rank;
  out.witness = e0;

  std::mt19937_64 rng(seed);
  auto gauss = [&rng]() {
    // Box-Muller on raw 53-bit uniforms
    const double u1 = ((rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = ((rng() >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * M_PI * u2);
  };
  for (int t = 0; t < n_trials; ++t) {
    Eigen::VectorXcd w(g);
    for (int k = 0; k < g; ++k) w(k) = Cplx(gauss(), gauss());
    const int r = contracted_rank(T, w).rank;
    if (r > out.max_rank) {
      out.max_rank = r;
      out.witness = w;
    }
  }
  return out;
}

}  // namespace bettilab
