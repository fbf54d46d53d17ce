#include "bettilab/json_out.hpp"

#include <charconv>
#include <cmath>

namespace bettilab {

std::string format_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "1e999" : (v < 0 ? "-1e999" : "0");
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v;
  v.kind_ = Kind::boolean;
  v.b_ = b;
  return v;
}
JsonValue JsonValue::integer(std::int64_t i) {
  JsonValue v;
  v.kind_ = Kind::integer;
  v.i_ = i;
  return v;
}
JsonValue JsonValue::real(double d) {
  JsonValue v;
  v.kind_ = Kind::real;
  v.d_ = d;
  return v;
}
JsonValue JsonValue::string(std::string s) {
  JsonValue v;
  v.kind_ = Kind::string;
  v.s_ = std::move(s);
  return v;
}
JsonValue JsonValue::array() {
  JsonValue v;
  v.kind_ = Kind::array;
  return v;
}
JsonValue JsonValue::object() {
  JsonValue v;
  v.kind_ = Kind::object;
  return v;
}

void JsonValue::push(JsonValue v) { arr_.push_back(std::move(v)); }

void JsonValue::set(const std::string& key, JsonValue v) {
  for (auto& [k, val] : obj_)
    if (k == key) {
      val = std::move(v);
      return;
    }
  obj_.emplace_back(key, std::move(v));
}

namespace {
void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}
}  // namespace

void JsonValue::write(std::string& out, int indent, int depth) const {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string pad_close = indent > 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (kind_) {
    case Kind::null: out += "null"; break;
    case Kind::boolean: out += b_ ? "true" : "false"; break;
    case Kind::integer: out += std::to_string(i_); break;
    case Kind::real: out += format_double(d_); break;
    case Kind::string: write_escaped(out, s_); break;
    case Kind::array: {
      out += '[';
      for (std::size_t k = 0; k < arr_.size(); ++k) {
        if (k) out += ',';
        out += nl;
        out += pad;
        arr_[k].write(out, indent, depth + 1);
      }
      if (!arr_.empty()) {
        out += nl;
        out += pad_close;
      }
      out += ']';
      break;
    }
    case Kind::object: {
      out += '{';
      for (std::size_t k = 0; k < obj_.size(); ++k) {
        if (k) out += ',';
        out += nl;
        out += pad;
        write_escaped(out, obj_[k].first);
        out += indent > 0 ? ": " : ":";
        obj_[k].second.write(out, indent, depth + 1);
      }
      if (!obj_.empty()) {
        out += nl;
        out += pad_close;
      }
      out += '}';
      break;
    }
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

JsonValue JsonValue::complex(const Cplx& z) {
  JsonValue a = array();
  a.push(real(z.real()));
  a.push(real(z.imag()));
  return a;
}

JsonValue JsonValue::matrix(const Eigen::MatrixXcd& m) {
  JsonValue rows = array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    JsonValue row = array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push(complex(m(i, j)));
    rows.push(std::move(row));
  }
  return rows;
}

JsonValue JsonValue::matrix(const Eigen::MatrixXd& m) {
  JsonValue rows = array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    JsonValue row = array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push(real(m(i, j)));
    rows.push(std::move(row));
  }
  return rows;
}

JsonValue JsonValue::matrix(const Eigen::MatrixXi& m) {
  JsonValue rows = array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    JsonValue row = array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push(integer(m(i, j)));
    rows.push(std::move(row));
  }
  return rows;
}

JsonValue JsonValue::vector(const Eigen::VectorXd& v) {
  JsonValue a = array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push(real(v(i)));
  return a;
}

}  // namespace bettilab
