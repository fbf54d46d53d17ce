#include "bettilab/rational.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace bettilab {

Rational parse_rational(const std::string& s) {
  std::string t;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) fail(errc::schema_error, "empty rational literal");
  try {
    const auto slash = t.find('/');
    if (slash == std::string::npos) return Rational(BigInt(t));
    const BigInt num(t.substr(0, slash));
    const BigInt den(t.substr(slash + 1));
    if (den == 0) fail(errc::schema_error, "zero denominator in '" + s + "'");
    return Rational(num, den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::schema_error, "cannot parse rational '" + s + "'");
  }
}

namespace {

// One term of a sparse polynomial expression: [sign] [coeff] [*] [x[^k]].
struct Term {
  Rational coeff;
  int power = 0;
};

Term parse_term(const std::string& t) {
  Term term;
  term.coeff = 1;
  std::size_t pos = 0;
  std::string num;
  while (pos < t.size() && (std::isdigit(static_cast<unsigned char>(t[pos])) || t[pos] == '/')) num += t[pos++];
  if (!num.empty()) term.coeff = parse_rational(num);
  if (pos < t.size() && t[pos] == '*') ++pos;
  if (pos == t.size()) {
    if (num.empty()) fail(errc::schema_error, "empty term in polynomial expression");
    return term;
  }
  if (t[pos] != 'x') fail(errc::schema_error, "expected 'x' in term '" + t + "'");
  ++pos;
  term.power = 1;
  if (pos < t.size()) {
    if (t[pos] != '^') fail(errc::schema_error, "expected '^' in term '" + t + "'");
    try {
      term.power = std::stoi(t.substr(pos + 1));
    } catch (const std::exception&) {
      fail(errc::schema_error, "bad exponent in term '" + t + "'");
    }
  }
  if (term.power < 0) fail(errc::schema_error, "negative exponent in term '" + t + "'");
  return term;
}

}  // namespace

QPoly parse_poly(const std::string& expr) {
  std::string t;
  for (char ch : expr)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) fail(errc::schema_error, "empty polynomial expression");

  std::map<int, Rational> terms;
  std::size_t pos = 0;
  while (pos < t.size()) {
    int sign = 1;
    while (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) {
      if (t[pos] == '-') sign = -sign;
      ++pos;
    }
    std::size_t end = pos;
    while (end < t.size() && t[end] != '+' && t[end] != '-') ++end;
    Term term = parse_term(t.substr(pos, end - pos));
    terms[term.power] += Rational(sign) * term.coeff;
    pos = end;
  }
  if (terms.empty()) fail(errc::schema_error, "no terms in polynomial expression");
  std::vector<Rational> coeffs(terms.rbegin()->first + 1, Rational(0));
  for (const auto& [p, c] : terms) coeffs[p] = c;
  return QPoly(std::move(coeffs));
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << numerator(q);
  if (denominator(q) != 1) os << "/" << denominator(q);
  return os.str();
}

std::string to_string(const QPoly& f) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = f.degree(); k >= 0; --k) {
    Rational c = f.coeff(k);
    if (c == 0) continue;
    if (!first) os << (c > 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    Rational a = abs(c);
    if (k == 0 || a != 1) os << to_string(a);
    if (k > 0) {
      if (a != 1) os << "*";
      os << "x";
      if (k > 1) os << "^" << k;
    }
  }
  return os.str();
}

}  // namespace bettilab
