#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lpgkit/error.hpp"

namespace lpgkit {

enum class ValueKind { Integer, Real, Boolean, Text, RealVector };

inline const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "int";
    case ValueKind::Real: return "real";
    case ValueKind::Boolean: return "bool";
    case ValueKind::Text: return "text";
    case ValueKind::RealVector: return "realvec";
  }
  return "?";
}

/// Tagged union over the value kinds a property may carry. Real-valued
/// payloads are validated to be finite; real vectors must be non-empty.
class PropertyValue {
 public:
  PropertyValue() : v_(int64_t{0}) {}

  static PropertyValue integer(int64_t x) { return PropertyValue(Storage(x)); }

  static PropertyValue real(double x) {
    if (!std::isfinite(x)) fail(ErrorCode::InvalidProperty, "real value must be finite");
    return PropertyValue(Storage(x));
  }

  static PropertyValue boolean(bool x) { return PropertyValue(Storage(x)); }

  static PropertyValue text(std::string x) { return PropertyValue(Storage(std::move(x))); }

  static PropertyValue real_vector(std::vector<double> x) {
    if (x.empty()) fail(ErrorCode::InvalidProperty, "real vector must be non-empty");
    for (double c : x) {
      if (!std::isfinite(c)) fail(ErrorCode::InvalidProperty, "real vector component must be finite");
    }
    return PropertyValue(Storage(std::move(x)));
  }

  ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }

  int64_t as_integer() const { return std::get<int64_t>(v_); }
  double as_real() const { return std::get<double>(v_); }
  bool as_boolean() const { return std::get<bool>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  const std::vector<double>& as_real_vector() const { return std::get<std::vector<double>>(v_); }

  /// Numeric view: Integer and Real both read as double.
  double as_number() const {
    if (kind() == ValueKind::Integer) return static_cast<double>(as_integer());
    return as_real();
  }

  friend bool operator==(const PropertyValue& a, const PropertyValue& b) { return a.v_ == b.v_; }

  /// Total order used for canonical vocabularies: numbers by value,
  /// booleans false < true, text by byte order; kinds ordered by tag first.
  friend bool operator<(const PropertyValue& a, const PropertyValue& b) {
    if (a.v_.index() != b.v_.index()) return a.v_.index() < b.v_.index();
    return a.v_ < b.v_;
  }

 private:
  using Storage = std::variant<int64_t, double, bool, std::string, std::vector<double>>;
  explicit PropertyValue(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

}  // namespace lpgkit
