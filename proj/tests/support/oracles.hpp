#pragma once

// Test-side oracles, independent of the library's computation paths.

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "bettilab/cycles.hpp"
#include "bettilab/rational.hpp"

namespace oracles {

using bettilab::Cplx;
using bettilab::QPoly;
using bettilab::Rational;

/// Elliptic j-invariant from a period ratio via the q-expansion
/// j = E4(q)^3 / Delta(q), with all series coefficients generated on the fly
/// (divisor sums; product form of Delta). The input is reduced to the
/// fundamental domain first, so ~48 terms give far better than 1e-10.
inline Cplx j_from_tau(Cplx tau) {
  for (int it = 0; it < 512; ++it) {
    tau -= std::round(tau.real());
    if (std::norm(tau) < 1.0 - 1e-14)
      tau = -1.0 / tau;
    else
      break;
  }
  const Cplx q = std::exp(Cplx(0, 2 * M_PI) * tau);
  const int N = 48;

  std::vector<double> sigma3(N + 1, 0.0);
  for (int d = 1; d <= N; ++d)
    for (int n = d; n <= N; n += d) sigma3[n] += double(d) * d * d;

  Cplx e4(1, 0);
  Cplx qn(1, 0);
  for (int n = 1; n <= N; ++n) {
    qn *= q;
    e4 += 240.0 * sigma3[n] * qn;
  }

  Cplx delta = q;
  qn = Cplx(1, 0);
  for (int n = 1; n <= N; ++n) {
    qn *= q;
    Cplx factor = Cplx(1, 0) - qn;
    Cplx f24(1, 0);
    for (int k = 0; k < 24; ++k) f24 *= factor;
    delta *= f24;
  }
  return e4 * e4 * e4 / delta;
}

/// Classical Legendre-form invariant: j of y^2 = x(x-1)(x-lambda).
inline Cplx j_from_lambda(const Cplx& lam) {
  const Cplx num = lam * lam - lam + Cplx(1);
  const Cplx den = lam * lam * (lam - Cplx(1)) * (lam - Cplx(1));
  return 256.0 * num * num * num / den;
}

/// Cross-ratio (a-c)(b-d) / (b-c)(a-d) of four branch points; feeding it to
/// j_from_lambda gives the j-invariant of the genus-1 double cover.
inline Cplx cross_ratio(const Cplx& a, const Cplx& b, const Cplx& c, const Cplx& d) {
  return ((a - c) * (b - d)) / ((b - c) * (a - d));
}

// ---------------------------------------------------------------------------
// Brute-force loop intersection: resample every polygon edge into short
// pieces, re-derive the sheet label at each crossing from the stored base
// labels plus an independent scan of cut crossings, and count signs with an
// orientation predicate written from scratch.
// ---------------------------------------------------------------------------

namespace detail {

inline double orient(const Cplx& a, const Cplx& b, const Cplx& c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) -
         (b.imag() - a.imag()) * (c.real() - a.real());
}

inline bool proper_cross(const Cplx& a, const Cplx& b, const Cplx& c, const Cplx& d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
         o4 != 0;
}

// crossing point of two segments known to cross properly, by bisection on
// the orientation predicate (independent of any closed-form solve)
inline Cplx cross_point(Cplx a, Cplx b, const Cplx& c, const Cplx& d) {
  for (int it = 0; it < 80; ++it) {
    const Cplx m = (a + b) * 0.5;
    const bool am = (orient(c, d, a) > 0) != (orient(c, d, m) > 0);
    if (am)
      b = m;
    else
      a = m;
  }
  return (a + b) * 0.5;
}

}  // namespace detail

/// Independent signed same-sheet crossing count of two stored loops. The cut
/// system is reconstructed from the basis edges (every other tree segment,
/// plus the ray for odd-degree models); sheet labels at each crossing are
/// re-derived by walking the polygon from its start point.
inline int loop_intersection_oracle(const bettilab::CycleBasis& basis,
                                    const std::vector<Cplx>& roots, bool one_point_infinity,
                                    int k, int l) {
  std::vector<std::pair<Cplx, Cplx>> cuts;
  const int ne = static_cast<int>(basis.edge_cycles.size());
  for (int e = 0; e < ne; e += 2) cuts.push_back({roots[e], roots[e + 1]});
  if (one_point_infinity) {
    double R = 1.0;
    for (const auto& r : roots) R = std::max(R, std::abs(r));
    cuts.push_back({roots.back(), roots.back() + Cplx(100.0 * R, 0)});
  }

  // sheet at a point part-way along edge e, from scratch
  auto label_at = [&](const bettilab::SheetedPolygon& poly, std::size_t edge, const Cplx& x) {
    int sheet = poly.sheet[0];
    const std::size_t n = poly.pts.size();
    for (std::size_t e = 0; e < edge; ++e) {
      const Cplx a = poly.pts[e];
      const Cplx b = poly.pts[(e + 1) % n];
      for (const auto& [cu, cv] : cuts)
        if (detail::proper_cross(a, b, cu, cv)) sheet ^= 1;
    }
    const Cplx a = poly.pts[edge];
    for (const auto& [cu, cv] : cuts)
      if (detail::proper_cross(a, x, cu, cv)) sheet ^= 1;
    return sheet;
  };

  const auto& A = basis.edge_cycles[k].loop;
  const auto& B = basis.edge_cycles[l].loop;
  const std::size_t na = A.pts.size(), nb = B.pts.size();
  int total = 0;
  for (std::size_t ea = 0; ea < na; ++ea) {
    const Cplx a0 = A.pts[ea], a1 = A.pts[(ea + 1) % na];
    for (std::size_t eb = 0; eb < nb; ++eb) {
      const Cplx b0 = B.pts[eb], b1 = B.pts[(eb + 1) % nb];
      if (!detail::proper_cross(a0, a1, b0, b1)) continue;
      const Cplx x = detail::cross_point(a0, a1, b0, b1);
      if (label_at(A, ea, x) != label_at(B, eb, x)) continue;
      total += detail::orient(a0, a1, a0 + (b1 - b0)) > 0 ? 1 : -1;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Brute-force polynomial Pell oracle over Q: for each candidate order n the
// conditions "frac(S Q) has valuation <= -n" are linear in Q, with S the
// sqrt series. A nonzero kernel vector yields P = poly_part(S Q) and an exact
// verification of P^2 - f Q^2 = const != 0.
// ---------------------------------------------------------------------------

struct PellOracleHit {
  int order;
  QPoly P, Q;
  Rational c;
};

/// sqrt series computed independently (binomial-style recurrence on the
/// reversed polynomial divided out by the leading square).
inline std::vector<Rational> sqrt_series_oracle(const QPoly& f, int depth) {
  const int deg = f.degree();
  std::vector<Rational> c(depth + 1, Rational(0));
  c[0] = 1;
  auto F = [&](int k) { return k <= deg ? f.coeff(deg - k) : Rational(0); };
  for (int k = 1; k <= depth; ++k) {
    Rational acc = F(k);
    for (int j = 1; j < k; ++j) acc -= c[j] * c[k - j];
    c[k] = acc / 2;
  }
  return c;
}

inline std::optional<PellOracleHit> pell_oracle(const QPoly& f, int n_max) {
  const int h = f.degree() / 2;  // g + 1
  const int depth = 2 * n_max + 2 * h + 4;
  const std::vector<Rational> S = sqrt_series_oracle(f, depth);
  // S coefficient at power p: S[h - p]
  auto s_at = [&](int p) {
    const int k = h - p;
    return (k >= 0 && k <= depth) ? S[k] : Rational(0);
  };

  for (int n = h; n <= n_max; ++n) {
    const int qlen = n - h + 1;  // deg Q = n - h
    // rows: coefficients of x^{-1} .. x^{-(n-1)} of S*Q must vanish
    std::vector<std::vector<Rational>> A(n - 1, std::vector<Rational>(qlen, Rational(0)));
    for (int row = 0; row < n - 1; ++row) {
      const int power = -(row + 1);
      for (int j = 0; j < qlen; ++j) A[row][j] = s_at(power - j);
    }
    // exact kernel by Gaussian elimination
    const int rows = n - 1, cols = qlen;
    std::vector<int> pivot_col(rows, -1);
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
      int piv = -1;
      for (int r = rank; r < rows; ++r)
        if (A[r][col] != 0) {
          piv = r;
          break;
        }
      if (piv < 0) continue;
      std::swap(A[piv], A[rank]);
      const Rational inv = Rational(1) / A[rank][col];
      for (int cc = col; cc < cols; ++cc) A[rank][cc] *= inv;
      for (int r = 0; r < rows; ++r) {
        if (r == rank || A[r][col] == 0) continue;
        const Rational factor = A[r][col];
        for (int cc = col; cc < cols; ++cc) A[r][cc] -= factor * A[rank][cc];
      }
      pivot_col[rank] = col;
      ++rank;
    }
    if (rank == cols) continue;  // trivial kernel only
    // build one kernel vector: set the first free column to 1
    std::vector<Rational> qv(cols, Rational(0));
    int free_col = -1;
    for (int col = 0; col < cols; ++col) {
      bool is_pivot = false;
      for (int r = 0; r < rank; ++r)
        if (pivot_col[r] == col) is_pivot = true;
      if (!is_pivot) {
        free_col = col;
        break;
      }
    }
    qv[free_col] = 1;
    for (int r = rank - 1; r >= 0; --r) {
      Rational acc = 0;
      for (int cc = pivot_col[r] + 1; cc < cols; ++cc) acc += A[r][cc] * qv[cc];
      qv[pivot_col[r]] = -acc;
    }
    QPoly Q(std::move(qv));
    if (Q.is_zero()) continue;

    // P = poly_part(S * Q)
    std::vector<Rational> pc(h + Q.degree() + 1, Rational(0));
    for (int p = 0; p <= h + Q.degree(); ++p) {
      Rational acc = 0;
      for (int j = 0; j <= Q.degree(); ++j) acc += Q.coeff(j) * s_at(p - j);
      pc[p] = acc;
    }
    QPoly P(std::move(pc));
    const QPoly rem = P * P - f * Q * Q;
    if (rem.degree() == 0 && rem.coeff(0) != 0) {
      // normalize P monic
      const Rational lead = P.lead();
      P = P * (Rational(1) / lead);
      Q = Q * (Rational(1) / lead);
      const QPoly r2 = P * P - f * Q * Q;
      return PellOracleHit{P.degree(), P, Q, r2.coeff(0)};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random family points with comfortable branch separation.
// ---------------------------------------------------------------------------

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

inline bettilab::FamilyPoint random_even_point(std::mt19937_64& rng, int genus, bool real_only,
                                               double spread = 1.5) {
  using namespace bettilab;
  for (;;) {
    std::vector<Cplx> params(2 * genus + 2);
    for (auto& c : params)
      c = Cplx(uniform(rng, -spread, spread), real_only ? 0.0 : uniform(rng, -spread, spread));
    try {
      FamilyPoint p = make_point(FamilyModel{ModelKind::even_degree, genus}, params);
      const CurveData cd = curve_data(p);
      if (cd.min_separation > 0.08 * cd.scale) return p;
    } catch (const Error&) {
    }
  }
}

inline bettilab::FamilyPoint random_odd_point(std::mt19937_64& rng, int genus, bool real_only,
                                              double spread = 3.0) {
  using namespace bettilab;
  for (;;) {
    std::vector<Cplx> params(2 * genus - 1);
    for (auto& c : params)
      c = Cplx(uniform(rng, -spread, spread), real_only ? 0.0 : uniform(rng, -spread, spread));
    try {
      FamilyPoint p = make_point(FamilyModel{ModelKind::odd_degree, genus}, params);
      const CurveData cd = curve_data(p);
      if (cd.min_separation > 0.08 * cd.scale) return p;
    } catch (const Error&) {
    }
  }
}

/// All-real-branch-point even model: expand from sorted random real roots.
inline bettilab::FamilyPoint random_all_real_even_point(std::mt19937_64& rng, int genus) {
  using namespace bettilab;
  for (;;) {
    std::vector<Cplx> roots(2 * genus + 2);
    for (auto& r : roots) r = Cplx(uniform(rng, -2.5, 2.5), 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < roots.size() && ok; ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j)
        if (std::abs(roots[i] - roots[j]) < 0.25) {
          ok = false;
          break;
        }
    if (!ok) continue;
    const Poly f = Poly::from_roots(roots.begin(), roots.end());
    std::vector<Cplx> params(f.coeffs().begin(), f.coeffs().end() - 1);
    for (auto& c : params) c = Cplx(c.real(), 0.0);
    try {
      return make_point(FamilyModel{ModelKind::even_degree, genus}, params);
    } catch (const Error&) {
    }
  }
}

}  // namespace oracles
