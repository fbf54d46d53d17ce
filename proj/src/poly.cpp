#include "bettilab/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "bettilab/errors.hpp"

namespace bettilab {

double coeff_norm(const Poly& f) {
  double m = 0;
  for (const auto& c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

std::vector<Cplx> find_roots(const Poly& f) {
  const int n = f.degree();
  if (n < 0) fail(errc::root_finding_failure, "zero polynomial has no roots");
  if (n == 0) return {};
  if (n == 1) return {-f.coeff(0) / f.coeff(1)};

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  const Cplx lead = f.lead();
  for (int k = 0; k < n; ++k) companion(k, n - 1) = -f.coeff(k) / lead;
  for (int k = 1; k < n; ++k) companion(k, k - 1) = Cplx(1);

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    fail(errc::root_finding_failure, "companion eigenvalue iteration did not converge");

  const Poly df = f.derivative();
  std::vector<Cplx> roots(n);
  for (int k = 0; k < n; ++k) {
    Cplx r = solver.eigenvalues()(k);
    for (int it = 0; it < 4; ++it) {
      const Cplx fr = f.eval(r);
      const Cplx dfr = df.eval(r);
      if (std::abs(dfr) == 0.0) break;  // multiple root; leave the eigenvalue as is
      const Cplx step = fr / dfr;
      r -= step;
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
    }
    roots[k] = r;
  }

  const double scale = 1.0 + coeff_norm(f) / std::abs(lead);
  for (const Cplx& r : roots) {
    const double local = std::pow(1.0 + std::abs(r), n);
    if (!(std::abs(f.eval(r) / lead) < 1e-10 * scale * local))
      fail(errc::root_finding_failure, "Newton polishing left a large residual");
  }
  return roots;
}

}  // namespace bettilab
