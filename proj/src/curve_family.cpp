#include "bettilab/curve_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bettilab/errors.hpp"

namespace bettilab {

namespace {

constexpr double kRealnessTol = 1e-12;
constexpr double kSeparationTol = 1e-8;  // relative; see discriminant test below

bool params_all_real(const std::vector<Cplx>& params) {
  double scale = 1.0;
  for (const auto& s : params) scale = std::max(scale, std::abs(s));
  for (const auto& s : params)
    if (std::abs(s.imag()) > kRealnessTol * scale) return false;
  return true;
}

void sort_lex(std::vector<Cplx>& pts) {
  std::sort(pts.begin(), pts.end(), [](const Cplx& a, const Cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

double min_pairwise_distance(const std::vector<Cplx>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      m = std::min(m, std::abs(pts[i] - pts[j]));
  return m;
}

}  // namespace

Poly family_poly(const FamilyModel& model, const std::vector<Cplx>& params) {
  if (model.kind == ModelKind::odd_degree) {
    std::vector<Cplx> roots;
    roots.reserve(2 * model.genus + 1);
    roots.push_back(0.0);
    roots.push_back(1.0);
    roots.insert(roots.end(), params.begin(), params.end());
    return Poly::from_roots(roots.begin(), roots.end());
  }
  std::vector<Cplx> coeffs = params;
  coeffs.push_back(1.0);  // monic of degree 2g+2
  return Poly(std::move(coeffs));
}

FamilyPoint make_point(const FamilyModel& model, std::vector<Cplx> params) {
  if (model.genus < 1) fail(errc::invalid_param, "genus must be positive");
  if (static_cast<int>(params.size()) != model.arity())
    fail(errc::invalid_param, "expected " + std::to_string(model.arity()) + " parameters, got " +
                                  std::to_string(params.size()));

  if (model.kind == ModelKind::odd_degree) {
    double scale = 1.0;
    for (const auto& s : params) scale = std::max(scale, std::abs(s));
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (std::abs(params[i]) < kSeparationTol * scale || std::abs(params[i] - 1.0) < kSeparationTol * scale)
        fail(errc::invalid_param, "odd-degree parameter coincides with 0 or 1");
      for (std::size_t j = i + 1; j < params.size(); ++j)
        if (std::abs(params[i] - params[j]) < kSeparationTol * scale)
          fail(errc::invalid_param, "repeated odd-degree parameter");
    }
  }

  FamilyPoint p{model, std::move(params), false};
  p.all_real = params_all_real(p.params);
  curve_data(p);  // runs the discriminant test; throws on degeneracy
  return p;
}

CurveData curve_data(const FamilyPoint& p) {
  CurveData c;
  c.genus = p.model.genus;
  c.infinity = p.model.kind == ModelKind::odd_degree ? InfinityStructure::one_point
                                                     : InfinityStructure::two_points;
  c.f = family_poly(p.model, p.params);
  c.fprime = c.f.derivative();
  c.branch_points = find_roots(c.f);
  // For a real polynomial, snap conjugate noise so that real roots are exactly
  // real and the lexicographic order is reproducible.
  bool real_coeffs = true;
  for (const auto& a : c.f.coeffs())
    if (std::abs(a.imag()) > kRealnessTol * (1.0 + std::abs(a))) real_coeffs = false;
  if (real_coeffs) {
    double scale = 1.0;
    for (const auto& b : c.branch_points) scale = std::max(scale, std::abs(b));
    for (auto& b : c.branch_points)
      if (std::abs(b.imag()) < 1e-10 * scale) b = Cplx(b.real(), 0.0);
  }
  sort_lex(c.branch_points);

  c.scale = 1.0;
  for (const auto& b : c.branch_points) c.scale = std::max(c.scale, std::abs(b));
  c.min_separation = min_pairwise_distance(c.branch_points);
  if (!(c.min_separation > kSeparationTol * c.scale))
    fail(errc::degenerate_discriminant, "branch points closer than separation tolerance");

  for (const auto& b : c.branch_points)
    if (std::abs(c.fprime.eval(b)) == 0.0)
      fail(errc::degenerate_discriminant, "f' vanishes at a branch point");
  return c;
}

}  // namespace bettilab
