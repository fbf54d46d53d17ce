#pragma once

#include <optional>
#include <utility>

#include "bettilab/curve_family.hpp"
#include "bettilab/rational.hpp"

namespace bettilab {

/// Truncated series in descending powers of x:
/// S = sum_{k=0}^{order} coeff[k] * x^{lead - k}, exact rational entries.
struct LaurentSeries {
  int lead = 0;
  std::vector<Rational> coeff;

  int order() const { return static_cast<int>(coeff.size()) - 1; }
  Rational at_power(int p) const {
    const int k = lead - p;
    if (k < 0 || k > order()) return Rational(0);
    return coeff[k];
  }
};

/// S with S^2 = f + O(x^{deg f / 2 - order}), S monic of degree deg(f)/2.
/// Throws OddDegree for odd-degree f; f must be monic.
LaurentSeries sqrt_series(const QPoly& f, int order);

struct PellSolution {
  QPoly P;     // monic, deg = order
  QPoly Q;     // deg = order - g - 1
  Rational c;  // P^2 - f Q^2 = c != 0, exact
  int order = 0;
};

/// Continued-fraction expansion of sqrt(f) in the Laurent field at infinity;
/// returns the first convergent whose remainder is a nonzero constant, i.e.
/// the fundamental solution of P^2 - f Q^2 = c, provided deg P <= n_max.
/// none means the section [inf+ - inf-] has no torsion of order <= n_max.
std::optional<PellSolution> pell_solve(const QPoly& f, int n_max);

/// The even-degree family point with f = P^2 - p and its built-in torsion
/// certificate (P, 1, p) of order deg P = g + 1.
std::pair<FamilyPoint, PellSolution> pell_family(const QPoly& P, const Rational& p);

}  // namespace bettilab
