#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "bettilab/errors.hpp"
#include "bettilab/poly.hpp"

namespace bettilab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using QPoly = PolyT<Rational>;

inline QPoly monic(const QPoly& f) {
  if (f.is_zero()) return f;
  return f * (Rational(1) / f.lead());
}

inline QPoly poly_gcd(QPoly a, QPoly b) {
  while (!b.is_zero()) {
    auto [q, r] = a.divrem(b);
    (void)q;
    a = b;
    b = r;
  }
  return a.is_zero() ? a : monic(a);
}

inline bool is_squarefree(const QPoly& f) {
  if (f.degree() <= 0) return true;
  return poly_gcd(f, f.derivative()).degree() == 0;
}

inline Poly to_complex(const QPoly& f) {
  std::vector<Cplx> c(f.coeffs().size());
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = Cplx(static_cast<double>(f.coeffs()[k]), 0.0);
  return Poly(std::move(c));
}

/// Parses "p/q" or "p" (optional sign, arbitrary precision).
Rational parse_rational(const std::string& s);

/// Parses either a sparse expression like "x^4 - 3/2*x + 5" or is fed a dense
/// coefficient list by the callers that have one.
QPoly parse_poly(const std::string& expr);

std::string to_string(const Rational& q);
std::string to_string(const QPoly& f);

}  // namespace bettilab
