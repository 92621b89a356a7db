#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"

namespace fieldscan {

/// Summary of one column. Numeric-only fields are empty for nominal columns
/// and for columns with no observed values.
struct ColumnStats {
  std::string attribute;
  std::size_t count = 0;
  std::size_t missing = 0;
  std::optional<double> mean;
  std::optional<double> std_dev;  // population
  std::optional<double> min;
  std::optional<double> max;
  std::optional<Value> mode;
};

/// Most frequent non-missing value; ties go to the value seen first.
inline std::optional<Value> mode_of(std::span<const Value> values) {
  struct Tally {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::map<std::string, Tally> labels;
  std::map<double, Tally> numbers;
  std::optional<Value> best;
  Tally best_tally;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = values[i];
    if (v.is_missing()) continue;
    Tally* t = nullptr;
    if (v.is_number()) {
      auto [it, fresh] = numbers.try_emplace(v.as_number(), Tally{0, i});
      t = &it->second;
    } else {
      auto [it, fresh] = labels.try_emplace(v.as_label(), Tally{0, i});
      t = &it->second;
    }
    ++t->count;
    if (!best || t->count > best_tally.count ||
        (t->count == best_tally.count && t->first < best_tally.first)) {
      best = values[t->first];
      best_tally = *t;
    }
  }
  return best;
}

inline ColumnStats column_stats(const Dataset& ds, std::string_view attr) {
  const auto c = ds.index_of(attr);
  ColumnStats s;
  s.attribute = std::string(attr);
  const auto values = ds.column(c);
  std::vector<double> xs;
  for (const auto& v : values) {
    if (v.is_missing()) {
      ++s.missing;
      continue;
    }
    ++s.count;
    if (v.is_number()) xs.push_back(v.as_number());
  }
  s.mode = mode_of(values);
  if (ds.schema()[c].kind == AttributeKind::Numeric && !xs.empty()) {
    double sum = 0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    s.mean = mean;
    s.std_dev = std::sqrt(ss / static_cast<double>(xs.size()));
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    s.min = *lo;
    s.max = *hi;
  }
  return s;
}

/// z-scores each listed numeric attribute with the population standard
/// deviation. Zero-variance columns become all zeros; Missing stays Missing.
inline Dataset znormalize(const Dataset& ds, std::span<const std::string> attrs) {
  Dataset out = ds;
  for (const auto& name : attrs) {
    const auto c = ds.index_of(name);
    if (ds.schema()[c].kind != AttributeKind::Numeric)
      throw SchemaError("cannot z-normalize nominal attribute '" + name + "'");
    const auto st = column_stats(ds, name);
    auto col = ds.column(c);
    for (auto& v : col) {
      if (v.is_missing()) continue;
      const double sd = st.std_dev.value_or(0.0);
      v = Value(sd > 0 ? (v.as_number() - *st.mean) / sd : 0.0);
    }
    out = out.with_column(ds.schema()[c], std::move(col));
  }
  return out;
}

/// All numeric attributes of `ds`.
inline std::vector<std::string> numeric_attributes(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& a : ds.schema().attributes())
    if (a.kind == AttributeKind::Numeric) out.push_back(a.name);
  return out;
}

enum class BinningMethod { EqualWidth, EqualFrequency };

/// Interval partition of a numeric column: [min, c1), [c1, c2), ..., [ck, max].
/// With no cuts the single interval is [min, max].
struct Binning {
  double min = 0;
  double max = 0;
  std::vector<double> cuts;

  std::size_t bin_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
  }

  std::string label(std::size_t bin) const {
    const double lo = bin == 0 ? min : cuts[bin - 1];
    const bool last = bin == cuts.size();
    const double hi = last ? max : cuts[bin];
    return "[" + format_number(lo) + "," + format_number(hi) + (last ? "]" : ")");
  }
};

inline Binning make_binning(std::vector<double> xs, std::size_t n_bins, BinningMethod method) {
  if (n_bins < 2) throw ArgumentError("n_bins must be at least 2");
  if (xs.empty()) throw DataError("cannot discretize a column with no observed values");
  std::sort(xs.begin(), xs.end());
  Binning b;
  b.min = xs.front();
  b.max = xs.back();
  if (b.min == b.max) return b;

  std::vector<double> candidates;
  if (method == BinningMethod::EqualWidth) {
    const double width = (b.max - b.min) / static_cast<double>(n_bins);
    for (std::size_t i = 1; i < n_bins; ++i) candidates.push_back(b.min + width * static_cast<double>(i));
  } else {
    const auto m = xs.size();
    for (std::size_t i = 1; i < n_bins; ++i) {
      const auto j = (i * m + n_bins - 1) / n_bins;  // first sorted index of bin i
      if (j < m) candidates.push_back(xs[j]);
    }
  }
  // Cuts must lie in (min, max] and increase strictly. A cut that collides
  // with the previous one moves up to the next distinct observed value.
  double last = b.min;
  for (double cut : candidates) {
    if (cut <= last) {
      auto it = std::upper_bound(xs.begin(), xs.end(), last);
      if (it == xs.end()) break;
      cut = *it;
    }
    if (cut > b.max) break;
    b.cuts.push_back(cut);
    last = cut;
  }
  return b;
}

/// Replaces a numeric attribute by a nominal one whose labels are its interval.
inline Dataset discretize(const Dataset& ds, std::string_view attr, std::size_t n_bins,
                          BinningMethod method) {
  const auto c = ds.index_of(attr);
  if (ds.schema()[c].kind != AttributeKind::Numeric)
    throw SchemaError("cannot discretize nominal attribute '" + std::string(attr) + "'");
  if (n_bins < 2) throw ArgumentError("n_bins must be at least 2");
  std::vector<double> xs;
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    if (!ds.at(r, c).is_missing()) xs.push_back(ds.at(r, c).as_number());
  const auto binning = make_binning(std::move(xs), n_bins, method);

  std::vector<Value> col;
  col.reserve(ds.num_rows());
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    const auto& v = ds.at(r, c);
    col.push_back(v.is_missing() ? Value() : Value(binning.label(binning.bin_of(v.as_number()))));
  }
  return ds.with_column({std::string(attr), AttributeKind::Nominal}, std::move(col));
}

}  // namespace fieldscan
