#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <complex>

namespace bettilab {

/// Extended-precision scalars for the "dd" quadrature mode: 106-bit binary
/// mantissa, matching double-double headroom.
using DDReal =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<106, boost::multiprecision::digit_base_2>>;
using DDCplx = boost::multiprecision::number<
    boost::multiprecision::complex_adaptor<boost::multiprecision::cpp_bin_float<106, boost::multiprecision::digit_base_2>>>;

enum class Precision { f64, dd };

template <class C>
struct scalar_traits;

template <>
struct scalar_traits<std::complex<double>> {
  using real_type = double;
  static double to_double(double x) { return x; }
  static std::complex<double> to_std(const std::complex<double>& z) { return z; }
  static std::complex<double> from_std(const std::complex<double>& z) { return z; }
};

template <>
struct scalar_traits<DDCplx> {
  using real_type = DDReal;
  static double to_double(const DDReal& x) { return x.convert_to<double>(); }
  static std::complex<double> to_std(const DDCplx& z) {
    return {z.real().convert_to<double>(), z.imag().convert_to<double>()};
  }
  static DDCplx from_std(const std::complex<double>& z) { return DDCplx(z.real(), z.imag()); }
};

}  // namespace bettilab
