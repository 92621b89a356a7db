#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "fieldscan/errors.hpp"

namespace fieldscan {

enum class AttributeKind { Numeric, Nominal };

inline std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::Numeric ? "numeric" : "nominal";
}

/// Shortest decimal text that parses back to the same double. Plain fixed
/// notation in the usual magnitude range, scientific outside it.
inline std::string format_number(double x) {
  char buf[64];
  const double a = std::fabs(x);
  const auto fmt = (a == 0.0 || (a >= 1e-6 && a < 1e15))
                       ? std::chars_format::fixed
                       : std::chars_format::scientific;
  auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
  return std::string(buf, res.ptr);
}

/// One cell: a real number, a text label, or Missing.
class Value {
 public:
  Value() = default;
  explicit Value(double number) : v_(number) {}
  explicit Value(std::string label) : v_(std::move(label)) {}
  explicit Value(const char* label) : v_(std::string(label)) {}

  static Value missing() { return Value(); }

  bool is_missing() const noexcept { return std::holds_alternative<std::monostate>(v_); }
  bool is_number() const noexcept { return std::holds_alternative<double>(v_); }
  bool is_label() const noexcept { return std::holds_alternative<std::string>(v_); }

  double as_number() const {
    if (!is_number()) throw SchemaError("value is not a number");
    return std::get<double>(v_);
  }
  const std::string& as_label() const {
    if (!is_label()) throw SchemaError("value is not a label");
    return std::get<std::string>(v_);
  }

  /// CSV/JSON text form; Missing renders as the empty string.
  std::string to_text() const {
    if (is_number()) return format_number(std::get<double>(v_));
    if (is_label()) return std::get<std::string>(v_);
    return {};
  }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  std::variant<std::monostate, double, std::string> v_;
};

using Row = std::vector<Value>;
using RowId = std::int64_t;

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::Numeric;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Ordered list of uniquely named attributes.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      const auto& name = attributes_[i].name;
      if (name.empty()) throw SchemaError("attribute names must be nonempty");
      if (!index_.emplace(name, i).second)
        throw SchemaError("duplicate attribute name '" + name + "'");
    }
  }

  std::size_t size() const noexcept { return attributes_.size(); }
  const Attribute& operator[](std::size_t i) const { return attributes_[i]; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw SchemaError("unknown attribute '" + std::string(name) + "'");
    return it->second;
  }

  friend bool operator==(const Schema& a, const Schema& b) { return a.attributes_ == b.attributes_; }

 private:
  std::vector<Attribute> attributes_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline bool value_fits(const Value& v, AttributeKind kind) {
  if (v.is_missing()) return true;
  return kind == AttributeKind::Numeric ? v.is_number() : v.is_label();
}

/// Immutable table of typed rows with stable row identifiers. Every
/// transformation returns a new Dataset; row_ids survive projection and
/// row selection.
class Dataset {
 public:
  Dataset() = default;

  Dataset(Schema schema, std::vector<Row> rows) {
    auto ids = sequential_ids(rows.size());
    *this = Dataset(std::move(schema), std::move(rows), std::move(ids));
  }

  Dataset(Schema schema, std::vector<Row> rows, std::vector<RowId> row_ids)
      : schema_(std::move(schema)), rows_(std::move(rows)), row_ids_(std::move(row_ids)) {
    if (rows_.size() != row_ids_.size())
      throw SchemaError("row_ids count does not match row count");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() != schema_.size())
        throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) +
                          " values, schema has " + std::to_string(schema_.size()));
      for (std::size_t c = 0; c < schema_.size(); ++c)
        if (!value_fits(rows_[r][c], schema_[c].kind))
          throw SchemaError("row " + std::to_string(r) + ": value of attribute '" +
                            schema_[c].name + "' does not match its kind");
    }
    auto sorted = row_ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw SchemaError("row_ids must be unique");
  }

  const Schema& schema() const noexcept { return schema_; }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  std::size_t num_attributes() const noexcept { return schema_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  const Row& row(std::size_t r) const { return rows_[r]; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  const Value& at(std::size_t r, std::size_t c) const { return rows_[r][c]; }
  RowId row_id(std::size_t r) const { return row_ids_[r]; }
  const std::vector<RowId>& row_ids() const noexcept { return row_ids_; }

  std::size_t index_of(std::string_view name) const { return schema_.index_of(name); }

  std::vector<Value> column(std::size_t c) const {
    std::vector<Value> out;
    out.reserve(rows_.size());
    for (const auto& row : rows_) out.push_back(row[c]);
    return out;
  }

  /// Projection onto `names`, in the order given.
  Dataset project(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    std::vector<Attribute> attrs;
    for (const auto& n : names) {
      idx.push_back(schema_.index_of(n));
      attrs.push_back(schema_[idx.back()]);
    }
    std::vector<Row> rows;
    rows.reserve(rows_.size());
    for (const auto& row : rows_) {
      Row out;
      out.reserve(idx.size());
      for (auto c : idx) out.push_back(row[c]);
      rows.push_back(std::move(out));
    }
    return Dataset(Schema(std::move(attrs)), std::move(rows), row_ids_);
  }

  /// Rows at the given positions, in the given order.
  Dataset select_rows(std::span<const std::size_t> positions) const {
    std::vector<Row> rows;
    std::vector<RowId> ids;
    rows.reserve(positions.size());
    ids.reserve(positions.size());
    for (auto p : positions) {
      rows.push_back(rows_.at(p));
      ids.push_back(row_ids_.at(p));
    }
    return Dataset(schema_, std::move(rows), std::move(ids));
  }

  /// Replaces the column named `attr.name` if it exists, else appends it.
  Dataset with_column(const Attribute& attr, std::vector<Value> values) const {
    if (values.size() != rows_.size()) throw SchemaError("column length does not match row count");
    auto attrs = schema_.attributes();
    auto rows = rows_;
    if (schema_.contains(attr.name)) {
      const auto c = schema_.index_of(attr.name);
      attrs[c] = attr;
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r][c] = std::move(values[r]);
    } else {
      attrs.push_back(attr);
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r].push_back(std::move(values[r]));
    }
    return Dataset(Schema(std::move(attrs)), std::move(rows), row_ids_);
  }

  Dataset without_column(std::string_view name) const {
    schema_.index_of(name);
    std::vector<std::string> keep;
    for (const auto& a : schema_.attributes())
      if (a.name != name) keep.push_back(a.name);
    return project(keep);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  static std::vector<RowId> sequential_ids(std::size_t n) {
    std::vector<RowId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<RowId>(i);
    return ids;
  }

  Schema schema_;
  std::vector<Row> rows_;
  std::vector<RowId> row_ids_;
};

/// Positions of rows that are observed (non-Missing) in every listed column.
inline std::vector<std::size_t> complete_rows(const Dataset& ds, std::span<const std::size_t> cols) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    bool ok = true;
    for (auto c : cols) ok = ok && !ds.at(r, c).is_missing();
    if (ok) out.push_back(r);
  }
  return out;
}

}  // namespace fieldscan
