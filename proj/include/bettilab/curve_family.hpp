#pragma once

#include <vector>

#include "bettilab/poly.hpp"

namespace bettilab {

enum class ModelKind {
  odd_degree,   // y^2 = x(x-1)(x-s_0)...(x-s_{2g-2}), degree 2g+1
  even_degree,  // y^2 = x^{2g+2} + s_{2g+1} x^{2g+1} + ... + s_0
};

struct FamilyModel {
  ModelKind kind = ModelKind::even_degree;
  int genus = 1;

  int arity() const { return kind == ModelKind::odd_degree ? 2 * genus - 1 : 2 * genus + 2; }
  int curve_degree() const { return kind == ModelKind::odd_degree ? 2 * genus + 1 : 2 * genus + 2; }
};

struct FamilyPoint {
  FamilyModel model;
  std::vector<Cplx> params;
  bool all_real = false;
};

enum class InfinityStructure { one_point, two_points };

struct CurveData {
  Poly f;       // monic, squarefree
  Poly fprime;
  std::vector<Cplx> branch_points;  // sorted by (Re, Im)
  int genus = 0;
  InfinityStructure infinity = InfinityStructure::two_points;
  double scale = 1.0;          // max(1, max |branch point|)
  double min_separation = 0.0; // min pairwise branch-point distance
};

/// Expands the model polynomial at the given parameters (no validation).
Poly family_poly(const FamilyModel& model, const std::vector<Cplx>& params);

/// Validates parameters (arity, distinctness, discriminant) and returns the
/// point. Throws InvalidParam or DegenerateDiscriminant.
FamilyPoint make_point(const FamilyModel& model, std::vector<Cplx> params);

/// Expands f, finds and polishes branch points, checks separation.
CurveData curve_data(const FamilyPoint& p);

}  // namespace bettilab
