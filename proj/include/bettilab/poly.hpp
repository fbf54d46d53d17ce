#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

namespace bettilab {

using Real = double;
using Cplx = std::complex<double>;

/// Dense univariate polynomial with coefficients in ascending degree order.
/// Works over any commutative ring type with the usual operators; division
/// helpers additionally assume field coefficients.
template <class C>
class PolyT {
public:
  PolyT() = default;
  explicit PolyT(std::vector<C> coeffs) : c_(std::move(coeffs)) { trim(); }
  static PolyT constant(const C& v) { return PolyT(std::vector<C>{v}); }
  static PolyT identity() { return PolyT(std::vector<C>{C(0), C(1)}); }

  template <class It>
  static PolyT from_roots(It first, It last, const C& lead = C(1)) {
    PolyT p = constant(lead);
    for (It r = first; r != last; ++r) {
      p = p * PolyT(std::vector<C>{-*r, C(1)});
    }
    return p;
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for the zero polynomial
  bool is_zero() const { return c_.empty(); }
  const std::vector<C>& coeffs() const { return c_; }
  C coeff(int k) const { return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : C(0); }
  C lead() const { return c_.empty() ? C(0) : c_.back(); }

  template <class X>
  X eval(const X& x) const {
    X acc = X(0);
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * x + X(c_[k]);
    return acc;
  }

  PolyT derivative() const {
    if (c_.size() <= 1) return PolyT();
    std::vector<C> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * C(static_cast<int>(k));
    return PolyT(std::move(d));
  }

  friend PolyT operator+(const PolyT& a, const PolyT& b) {
    std::vector<C> r(std::max(a.c_.size(), b.c_.size()), C(0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return PolyT(std::move(r));
  }
  friend PolyT operator-(const PolyT& a, const PolyT& b) {
    std::vector<C> r(std::max(a.c_.size(), b.c_.size()), C(0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] -= b.c_[k];
    return PolyT(std::move(r));
  }
  friend PolyT operator*(const PolyT& a, const PolyT& b) {
    if (a.is_zero() || b.is_zero()) return PolyT();
    std::vector<C> r(a.c_.size() + b.c_.size() - 1, C(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return PolyT(std::move(r));
  }
  friend PolyT operator*(const PolyT& a, const C& s) {
    std::vector<C> r = a.c_;
    for (auto& v : r) v *= s;
    return PolyT(std::move(r));
  }
  friend PolyT operator-(const PolyT& a) { return a * C(-1); }

  /// Euclidean division over a field: *this = q*div + r with deg r < deg div.
  std::pair<PolyT, PolyT> divrem(const PolyT& div) const {
    PolyT rem = *this;
    std::vector<C> q(rem.c_.size() > div.c_.size() ? rem.c_.size() - div.c_.size() + 1 : 1, C(0));
    while (!rem.is_zero() && rem.degree() >= div.degree()) {
      const int shift = rem.degree() - div.degree();
      const C factor = rem.lead() / div.lead();
      q[shift] += factor;
      for (std::size_t k = 0; k < div.c_.size(); ++k)
        rem.c_[k + shift] -= factor * div.c_[k];
      rem.trim();
    }
    return {PolyT(std::move(q)), rem};
  }

  bool operator==(const PolyT& o) const { return c_ == o.c_; }

private:
  void trim() {
    while (!c_.empty() && c_.back() == C(0)) c_.pop_back();
  }
  std::vector<C> c_;
};

using Poly = PolyT<Cplx>;

/// All complex roots of f (with multiplicity), via companion-matrix
/// eigenvalues followed by Newton polishing on f itself.
std::vector<Cplx> find_roots(const Poly& f);

/// max |c_k| over the coefficients; scale factor for relative tolerances.
double coeff_norm(const Poly& f);

}  // namespace bettilab
