#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bettilab/poly.hpp"

namespace bettilab {

/// Minimal JSON value tree with insertion-ordered objects and fixed
/// 17-significant-digit float formatting, so identical runs serialize to
/// identical bytes.
class JsonValue {
public:
  enum class Kind { null, boolean, integer, real, string, array, object };

  JsonValue() : kind_(Kind::null) {}
  static JsonValue boolean(bool b);
  static JsonValue integer(std::int64_t v);
  static JsonValue real(double v);
  static JsonValue string(std::string s);
  static JsonValue array();
  static JsonValue object();

  void push(JsonValue v);                       // array append
  void set(const std::string& key, JsonValue v);  // object insert/replace

  std::string dump(int indent = 0) const;

  static JsonValue complex(const Cplx& z);  // [re, im]
  static JsonValue matrix(const Eigen::MatrixXcd& m);
  static JsonValue matrix(const Eigen::MatrixXd& m);
  static JsonValue matrix(const Eigen::MatrixXi& m);
  static JsonValue vector(const Eigen::VectorXd& v);

private:
  void write(std::string& out, int indent, int depth) const;

  Kind kind_;
  bool b_ = false;
  std::int64_t i_ = 0;
  double d_ = 0;
  std::string s_;
  std::vector<JsonValue> arr_;
  std::vector<std::pair<std::string, JsonValue>> obj_;
};

/// %.17g-equivalent formatting via std::to_chars; locale independent.
std::string format_double(double v);

}  // namespace bettilab
