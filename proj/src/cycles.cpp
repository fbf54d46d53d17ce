#include "bettilab/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "bettilab/errors.hpp"
#include "bettilab/quadrature.hpp"

namespace bettilab {

Eigen::MatrixXi standard_symplectic(int g) {
  Eigen::MatrixXi J = Eigen::MatrixXi::Zero(2 * g, 2 * g);
  for (int i = 0; i < g; ++i) {
    J(i, g + i) = 1;
    J(g + i, i) = -1;
  }
  return J;
}

namespace geom {

double segment_distance(const Cplx& p, const Cplx& a, const Cplx& b) {
  const Cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * d.real() + (p.imag() - a.imag()) * d.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

namespace {
inline double cross2(const Cplx& a, const Cplx& b) { return a.real() * b.imag() - a.imag() * b.real(); }
}  // namespace

bool segments_cross(const Cplx& a, const Cplx& b, const Cplx& c, const Cplx& d, double* s, double* t,
                    int* orientation) {
  const Cplx e = b - a;
  const Cplx f = d - c;
  const Cplx g0 = c - a;
  const double det = cross2(e, f);
  const double scale = std::abs(e) * std::abs(f);
  // degenerate, parallel or nearly parallel segments never count as crossing
  if (!(std::abs(det) > 1e-13 * scale) || scale == 0.0) return false;
  const double ss = cross2(g0, f) / det;
  const double tt = cross2(g0, e) / det;
  if (!(ss > 0.0 && ss < 1.0 && tt > 0.0 && tt < 1.0)) return false;
  if (s) *s = ss;
  if (t) *t = tt;
  if (orientation) *orientation = det > 0 ? 1 : -1;
  return true;
}

}  // namespace geom

namespace {

// odd count: intermediate cap vertices then never sit exactly on a straight
// cut through the cap center, which collinear (all-real) configurations
// would otherwise produce
constexpr int kArcPoints = 23;
constexpr double kGoldenAngle = 2.399963229728653;

bool int_equal(const Eigen::MatrixXi& a, const Eigen::MatrixXi& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().sum() == 0;
}

struct DegenerateGeometry {};  // internal: retry with a different layout

struct LoopGeom {
  SheetedPolygon poly;                          // base label at the start of each edge
  std::vector<std::vector<double>> cut_params;  // per edge: sorted cut-crossing parameters
};

// Label of the lift at parameter s along edge k.
int label_at(const LoopGeom& loop, std::size_t k, double s) {
  int lab = loop.poly.sheet[k];
  for (double c : loop.cut_params[k])
    if (c < s) lab ^= 1;
  return lab;
}

// Counts transversal crossings of segment [a, b] with the cuts; throws if a
// crossing is too close to an endpoint or to tangency to trust the parity.
int cut_crossings(const Cplx& a, const Cplx& b, const std::vector<std::pair<Cplx, Cplx>>& cuts,
                  std::vector<double>* params = nullptr) {
  int count = 0;
  for (const auto& [c, d] : cuts) {
    double s = 0, t = 0;
    int orient = 0;
    if (!geom::segments_cross(a, b, c, d, &s, &t, &orient)) {
      // A miss is only trustworthy when the segments are genuinely apart near
      // the would-be crossing; tangency is caught by the distance guards of
      // the caller, not here.
      continue;
    }
    if (s < 1e-7 || s > 1.0 - 1e-7 || t < 1e-7 || t > 1.0 - 1e-7) throw DegenerateGeometry{};
    ++count;
    if (params) params->push_back(s);
  }
  if (params) std::sort(params->begin(), params->end());
  return count;
}

SheetedPolygon make_stadium(const Cplx& u, const Cplx& v, double r, int start_label) {
  const Cplx d = (v - u) / std::abs(v - u);
  const Cplx nh = d * Cplx(0, 1);  // left normal of u -> v
  const Cplx m = (u + v) * 0.5;

  SheetedPolygon poly;
  auto push = [&](const Cplx& p) { poly.pts.push_back(p); };

  // counterclockwise, starting at the anchor point above the midpoint
  push(m + r * nh);
  push(u + r * nh);
  const double phi_u = std::arg(nh);
  for (int a = 1; a <= kArcPoints; ++a) push(u + r * std::polar(1.0, phi_u + M_PI * a / kArcPoints));
  push(v - r * nh);
  const double phi_v = std::arg(-nh);
  for (int a = 1; a <= kArcPoints; ++a) push(v + r * std::polar(1.0, phi_v + M_PI * a / kArcPoints));
  // closes back to m + r*nh

  poly.sheet.assign(poly.pts.size(), start_label);
  return poly;
}

void assign_labels(LoopGeom& loop, const std::vector<std::pair<Cplx, Cplx>>& cuts) {
  const std::size_t n = loop.poly.pts.size();
  loop.cut_params.assign(n, {});
  int lab = loop.poly.sheet[0];
  for (std::size_t k = 0; k < n; ++k) {
    loop.poly.sheet[k] = lab;
    const Cplx& a = loop.poly.pts[k];
    const Cplx& b = loop.poly.pts[(k + 1) % n];
    const int c = cut_crossings(a, b, cuts, &loop.cut_params[k]);
    if (c % 2) lab ^= 1;
  }
  // a loop encircles two branch points, so the walk must close up; a missed
  // tangential crossing shows up here and forces a retry with new geometry
  if (lab != loop.poly.sheet[0]) throw DegenerateGeometry{};
}

int loop_intersection(const LoopGeom& A, const LoopGeom& B) {
  int total = 0;
  const std::size_t na = A.poly.pts.size();
  const std::size_t nb = B.poly.pts.size();
  for (std::size_t k = 0; k < na; ++k) {
    const Cplx& a0 = A.poly.pts[k];
    const Cplx& a1 = A.poly.pts[(k + 1) % na];
    for (std::size_t l = 0; l < nb; ++l) {
      const Cplx& b0 = B.poly.pts[l];
      const Cplx& b1 = B.poly.pts[(l + 1) % nb];
      double s = 0, t = 0;
      int orient = 0;
      if (!geom::segments_cross(a0, a1, b0, b1, &s, &t, &orient)) continue;
      if (s < 1e-9 || s > 1 - 1e-9 || t < 1e-9 || t > 1 - 1e-9) throw DegenerateGeometry{};
      if (label_at(A, k, s) == label_at(B, l, t)) total += orient;
    }
  }
  return total;
}

struct Layout {
  Cplx x_base;
  Cplx y_base;
  std::vector<double> radius;          // stadium radius per edge
  std::vector<Cplx> q;                 // descent waypoints above each midpoint
  std::vector<int> parity;             // cut crossings of [x_base, q_k]
  std::vector<std::pair<Cplx, Cplx>> cuts;
};

// Deterministic layout for one retry attempt: stadium radii with attempt
// jitter, a rotated base point, and descent legs that cross the cuts
// transversally while staying clear of the branch points.
Layout plan_layout(const CurveData& c, int attempt) {
  const auto& bp = c.branch_points;
  const int n = static_cast<int>(bp.size());
  const int ne = n - 1;

  Cplx centroid = std::accumulate(bp.begin(), bp.end(), Cplx(0)) / Cplx(double(n));
  double R0 = 1e-9;
  for (const auto& b : bp) R0 = std::max(R0, std::abs(b - centroid));

  Layout lay;
  for (int k = 0; k < ne; k += 2) lay.cuts.push_back({bp[k], bp[k + 1]});
  if (c.infinity == InfinityStructure::one_point)
    lay.cuts.push_back({bp[n - 1], bp[n - 1] + Cplx(40.0 * R0 + 40.0, 0.0)});

  // the descent corridor narrows with each retry so clustered configurations
  // eventually admit a layout
  const double clear_tol =
      std::max(0.2 * c.min_separation * std::pow(0.8, attempt), 2e-6 * c.scale);

  lay.radius.assign(ne, 0.0);
  lay.q.assign(ne, Cplx(0));
  lay.parity.assign(ne, 0);

  for (int k = 0; k < ne; ++k) {
    const Cplx u = bp[k], v = bp[k + 1];
    double clear = std::abs(v - u);
    for (int j = 0; j < n; ++j) {
      if (j == k || j == k + 1) continue;
      clear = std::min(clear, geom::segment_distance(bp[j], u, v));
    }
    const double jitter = 1.0 + 0.03 * ((k + attempt) % 3) + 0.002 * attempt;
    lay.radius[k] = std::min(0.34 * clear, 0.30 * std::abs(v - u)) * jitter;
  }

  lay.x_base = centroid + std::polar(3.5 * R0 + 1.0, 0.7 + attempt * kGoldenAngle);
  lay.y_base = std::sqrt(c.f.eval(lay.x_base));

  for (int k = 0; k < ne; ++k) {
    const Cplx u = bp[k], v = bp[k + 1];
    const Cplx d = (v - u) / std::abs(v - u);
    const Cplx nh = d * Cplx(0, 1);
    lay.q[k] = (u + v) * 0.5 + 0.8 * lay.radius[k] * nh;
    for (int j = 0; j < n; ++j)
      if (geom::segment_distance(bp[j], lay.x_base, lay.q[k]) < clear_tol)
        throw DegenerateGeometry{};
    lay.parity[k] = cut_crossings(lay.x_base, lay.q[k], lay.cuts) +
                    cut_crossings(lay.q[k], (u + v) * 0.5 + lay.radius[k] * nh, lay.cuts);
  }
  return lay;
}

}  // namespace

std::pair<Eigen::MatrixXi, Eigen::MatrixXi> alternating_reduce(Eigen::MatrixXi M) {
  const int m = static_cast<int>(M.rows());
  if ((M + Eigen::MatrixXi(M.transpose())).cwiseAbs().sum() != 0)
    fail(errc::basis_degeneracy, "intersection matrix is not alternating");
  Eigen::MatrixXi U = Eigen::MatrixXi::Identity(m, m);

  auto swap_rc = [&](int i, int j) {
    if (i == j) return;
    M.row(i).swap(M.row(j));
    M.col(i).swap(M.col(j));
    U.row(i).swap(U.row(j));
  };
  auto add_rc = [&](int dst, int src, long long k) {
    if (k == 0) return;
    M.row(dst) += (k * M.row(src).cast<long long>()).cast<int>();
    M.col(dst) += (k * M.col(src).cast<long long>()).cast<int>();
    U.row(dst) += (k * U.row(src).cast<long long>()).cast<int>();
  };
  auto negate_rc = [&](int i) {
    M.row(i) = -M.row(i);
    M.col(i) = -M.col(i);
    U.row(i) = -U.row(i);
  };

  int pos = 0;
  while (pos < m) {
    int pr = -1, pc = -1, best = 0;
    for (int i = pos; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (M(i, j) != 0 && (best == 0 || std::abs(M(i, j)) < best)) {
          best = std::abs(M(i, j));
          pr = i;
          pc = j;
        }
    if (pr < 0) break;
    swap_rc(pos, pr);
    swap_rc(pos + 1, pc);  // pc > pr >= pos, so pc >= pos + 1 and the pivot survives the first swap

    bool reduced = false;
    while (!reduced) {
      reduced = true;
      const int d = M(pos, pos + 1);
      for (int j = pos + 2; j < m && reduced; ++j) {
        if (M(j, pos + 1) % d != 0 || M(j, pos) % d != 0) {
          // bring a smaller remainder into the pivot
          if (M(j, pos + 1) % d != 0) {
            add_rc(j, pos, -(M(j, pos + 1) / d));
            swap_rc(pos, j);
          } else {
            add_rc(j, pos + 1, M(j, pos) / d);
            swap_rc(pos + 1, j);
          }
          reduced = false;
        }
      }
      if (!reduced) continue;
      for (int j = pos + 2; j < m; ++j) {
        add_rc(j, pos, -(M(j, pos + 1) / d));
        add_rc(j, pos + 1, M(j, pos) / d);
      }
    }
    if (std::abs(M(pos, pos + 1)) != 1)
      fail(errc::basis_degeneracy, "intersection pairing has an elementary divisor larger than 1");
    if (M(pos, pos + 1) == -1) negate_rc(pos + 1);
    pos += 2;
  }

  const int pairs = pos / 2;
  // verify the tail is exactly zero
  for (int i = pos; i < m; ++i)
    if (M.row(i).cwiseAbs().sum() != 0) fail(errc::basis_degeneracy, "reduction left a nonzero tail");

  Eigen::MatrixXi T(2 * pairs, m);
  for (int t = 0; t < pairs; ++t) {
    T.row(t) = U.row(2 * t);
    T.row(pairs + t) = U.row(2 * t + 1);
  }
  Eigen::MatrixXi K(m - pos, m);
  for (int i = pos; i < m; ++i) K.row(i - pos) = U.row(i);
  return {T, K};
}

namespace {

// a-cycles around the sign-flipping segments, b-cycles telescoped from the
// gaps; valid whenever adjacent loops meet in a single signed crossing, which
// the all-real configurations guarantee.
bool adapted_transform(const Eigen::MatrixXi& M, int g, Eigen::MatrixXi* T_out) {
  const int ne = static_cast<int>(M.rows());
  Eigen::MatrixXi T = Eigen::MatrixXi::Zero(2 * g, ne);
  for (int t = 0; t < g; ++t) {
    if (2 * t >= ne) return false;
    T(t, 2 * t) = 1;
  }
  for (int t = 0; t < g; ++t) {
    int prev = 0;
    for (int i = t; i < g; ++i) {
      if (2 * i + 1 >= ne) return false;
      const int x = M(2 * i, 2 * i + 1);
      if (std::abs(x) != 1) return false;
      int coef;
      if (i == t) {
        coef = x;  // 1/x for x = ±1
      } else {
        const int y = M(2 * i, 2 * i - 1);
        coef = -prev * y * x;
      }
      T(g + t, 2 * i + 1) = coef;
      prev = coef;
    }
  }
  *T_out = T;
  return true;
}

}  // namespace

CycleBasis build_cycle_basis(const CurveData& c) {
  const auto& bp = c.branch_points;
  const int n = static_cast<int>(bp.size());
  const int ne = n - 1;
  const int g = c.genus;

  bool all_real = true;
  for (const auto& b : bp)
    if (b.imag() != 0.0) all_real = false;

  CycleBasis basis;
  basis.genus = g;

  bool built = false;
  for (int attempt = 0; attempt < 64 && !built; ++attempt) {
    try {
      const Layout lay = plan_layout(c, attempt);
      basis.edge_cycles.assign(ne, EdgeCycle{});
      std::vector<LoopGeom> loops(ne);
      for (int k = 0; k < ne; ++k) {
        EdgeCycle& ec = basis.edge_cycles[k];
        ec.ia = k;
        ec.ib = k + 1;
        ec.mid = (bp[k] + bp[k + 1]) * 0.5;
        const Cplx y_q = quad::continue_polyline<Cplx>(c.f, {lay.x_base, lay.q[k]}, lay.y_base);
        ec.y_mid = quad::continue_polyline<Cplx>(c.f, {lay.q[k], ec.mid}, y_q);
        ec.period_sign = -1;

        loops[k].poly = make_stadium(bp[k], bp[k + 1], lay.radius[k], lay.parity[k] % 2);
        assign_labels(loops[k], lay.cuts);
        ec.loop = loops[k].poly;
      }

      basis.intersection = Eigen::MatrixXi::Zero(ne, ne);
      for (int k = 0; k < ne; ++k)
        for (int l = k + 1; l < ne; ++l) {
          const int v = loop_intersection(loops[k], loops[l]);
          basis.intersection(k, l) = v;
          basis.intersection(l, k) = -v;
        }
      built = true;
    } catch (const DegenerateGeometry&) {
      continue;
    }
  }
  if (!built) fail(errc::basis_degeneracy, "no clean homology layout found for this configuration");

  auto [T, K] = alternating_reduce(basis.intersection);
  if (T.rows() != 2 * g)
    fail(errc::basis_degeneracy, "intersection matrix rank does not match the genus");
  basis.kernel = K;

  if (all_real) {
    Eigen::MatrixXi Ta;
    if (adapted_transform(basis.intersection, g, &Ta) &&
        int_equal(Ta * basis.intersection * Ta.transpose(), standard_symplectic(g))) {
      basis.transform = Ta;
      basis.conjugation_adapted = true;
    }
  }
  if (!basis.conjugation_adapted) basis.transform = T;

  if (!int_equal(basis.transform * basis.intersection * basis.transform.transpose(),
                 standard_symplectic(g)))
    fail(errc::basis_degeneracy, "transform does not reduce the intersection form to J");

  return basis;
}

}  // namespace bettilab
