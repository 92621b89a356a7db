#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"

namespace fieldscan {

/// Gower dissimilarity over the rows of one dataset.
///
/// Numeric attributes contribute |a - b| / (column max - column min), or 0
/// when the column range is 0; nominal attributes contribute 0 on equal
/// labels and 1 otherwise. Attributes missing on either side are left out and
/// the mean is taken over the rest; with nothing left the distance is 0.
/// Ranges come from the dataset the metric is built on.
class GowerMetric {
 public:
  explicit GowerMetric(const Dataset& ds)
      : rows_(ds.num_rows()), cols_(ds.num_attributes()), cells_(rows_ * cols_), range_(cols_, 0.0),
        numeric_(cols_), schema_(ds.schema()) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t c = 0; c < cols_; ++c) {
      numeric_[c] = ds.schema()[c].kind == AttributeKind::Numeric;
      std::map<std::string, double> codes;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t r = 0; r < rows_; ++r) {
        const auto& v = ds.at(r, c);
        double cell = nan;
        if (v.is_number()) {
          cell = v.as_number();
          lo = std::min(lo, cell);
          hi = std::max(hi, cell);
        } else if (v.is_label()) {
          auto [it, fresh] = codes.try_emplace(v.as_label(), static_cast<double>(codes.size()));
          cell = it->second;
        }
        cells_[r * cols_ + c] = cell;
      }
      if (numeric_[c] && hi > lo) range_[c] = hi - lo;
    }
  }

  std::size_t size() const noexcept { return rows_; }

  /// Distance between rows `i` and `j` of the dataset.
  double operator()(std::size_t i, std::size_t j) const {
    const double* a = &cells_[i * cols_];
    const double* b = &cells_[j * cols_];
    double sum = 0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (std::isnan(a[c]) || std::isnan(b[c])) continue;
      ++used;
      if (numeric_[c]) {
        if (range_[c] > 0) sum += std::fabs(a[c] - b[c]) / range_[c];
      } else if (a[c] != b[c]) {
        sum += 1.0;
      }
    }
    return used == 0 ? 0.0 : sum / static_cast<double>(used);
  }

  /// Distance between two arbitrary rows shaped like the dataset's schema,
  /// using the dataset's column ranges.
  double between(std::span<const Value> a, std::span<const Value> b) const {
    if (a.size() != cols_ || b.size() != cols_)
      throw SchemaError("row width does not match the schema");
    double sum = 0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cols_; ++c) {
      const auto kind = schema_[c].kind;
      if (!value_fits(a[c], kind) || !value_fits(b[c], kind))
        throw SchemaError("value of attribute '" + schema_[c].name + "' does not match its kind");
      if (a[c].is_missing() || b[c].is_missing()) continue;
      ++used;
      if (kind == AttributeKind::Numeric) {
        if (range_[c] > 0) sum += std::fabs(a[c].as_number() - b[c].as_number()) / range_[c];
      } else if (a[c].as_label() != b[c].as_label()) {
        sum += 1.0;
      }
    }
    return used == 0 ? 0.0 : sum / static_cast<double>(used);
  }

  double range(std::size_t c) const { return range_[c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> cells_;  // row-major; NaN marks Missing, labels hold codes
  std::vector<double> range_;
  std::vector<char> numeric_;
  Schema schema_;
};

/// Gower distance between two rows, with ranges taken from `ds`.
inline double mixed_distance(std::span<const Value> a, std::span<const Value> b, const Dataset& ds) {
  return GowerMetric(ds).between(a, b);
}

}  // namespace fieldscan
