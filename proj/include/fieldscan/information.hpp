#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"

namespace fieldscan {

/// Shannon entropy in bits of a class-count vector. Zero counts are skipped.
inline double entropy(std::span<const double> counts) {
  double total = 0;
  for (double c : counts) {
    if (c < 0) throw ArgumentError("class counts must be non-negative");
    total += c;
  }
  if (total <= 0) throw ArgumentError("entropy of an empty count vector");
  double h = 0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

inline double entropy(const std::map<std::string, std::size_t>& class_counts) {
  std::vector<double> counts;
  for (const auto& [label, n] : class_counts) counts.push_back(static_cast<double>(n));
  return entropy(counts);
}

struct AttributeScore {
  std::string attribute;
  double gain = 0;        // bits
  double split_info = 0;  // bits
  double gain_ratio = 0;
  std::optional<double> threshold;  // numeric attributes: best binary cut
};

namespace info_detail {

/// Class codes of a nominal target, in order of first appearance; -1 for Missing.
struct EncodedTarget {
  std::vector<std::string> classes;
  std::vector<int> codes;
};

inline EncodedTarget encode_target(const Dataset& ds, std::size_t t) {
  EncodedTarget out;
  out.codes.assign(ds.num_rows(), -1);
  std::map<std::string, int> index;
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    const auto& v = ds.at(r, t);
    if (v.is_missing()) continue;
    auto [it, fresh] = index.try_emplace(v.as_label(), static_cast<int>(out.classes.size()));
    if (fresh) out.classes.push_back(v.as_label());
    out.codes[r] = it->second;
  }
  return out;
}

inline double entropy_or_zero(std::span<const double> counts) {
  double total = 0;
  for (double c : counts) total += c;
  return total > 0 ? entropy(counts) : 0.0;
}

/// Scores attribute `c` over the row positions `rows` (all with an observed
/// class). Missing cells are excluded and the gain scaled by the observed
/// fraction. Numeric cuts sit at midpoints between consecutive distinct
/// values and must leave `min_leaf` observed rows on each side; nominal
/// partitions need at least two branches of `min_leaf` rows.
inline AttributeScore score_attribute(const Dataset& ds, std::size_t c, std::span<const std::size_t> rows,
                                      std::span<const int> codes, std::size_t n_classes,
                                      std::size_t min_leaf) {
  AttributeScore s;
  s.attribute = ds.schema()[c].name;
  std::vector<std::size_t> known;
  for (auto r : rows)
    if (!ds.at(r, c).is_missing()) known.push_back(r);
  if (known.empty() || rows.empty()) return s;
  const double n_known = static_cast<double>(known.size());
  const double observed_fraction = n_known / static_cast<double>(rows.size());

  std::vector<double> all(n_classes, 0.0);
  for (auto r : known) all[static_cast<std::size_t>(codes[r])] += 1;
  const double base = entropy(all);

  auto finish = [&](double remainder, std::span<const double> branch_sizes) {
    s.gain = std::max(0.0, observed_fraction * (base - remainder));
    s.split_info = entropy_or_zero(branch_sizes);
    s.gain_ratio = s.split_info > 0 ? s.gain / s.split_info : 0.0;
  };

  if (ds.schema()[c].kind == AttributeKind::Nominal) {
    std::map<std::string, std::size_t> branch_of;
    std::vector<std::vector<double>> branches;
    for (auto r : known) {
      auto [it, fresh] = branch_of.try_emplace(ds.at(r, c).as_label(), branches.size());
      if (fresh) branches.emplace_back(n_classes, 0.0);
      branches[it->second][static_cast<std::size_t>(codes[r])] += 1;
    }
    std::vector<double> sizes;
    std::size_t big_enough = 0;
    double remainder = 0;
    for (const auto& b : branches) {
      double n = 0;
      for (double x : b) n += x;
      sizes.push_back(n);
      if (n >= static_cast<double>(min_leaf)) ++big_enough;
      remainder += n / n_known * entropy(b);
    }
    if (big_enough < 2) return s;
    finish(remainder, sizes);
    return s;
  }

  std::sort(known.begin(), known.end(), [&](std::size_t a, std::size_t b) {
    const double x = ds.at(a, c).as_number();
    const double y = ds.at(b, c).as_number();
    return x < y || (x == y && a < b);
  });
  std::vector<double> left(n_classes, 0.0);
  std::vector<double> right = all;
  double best_remainder = 0;
  std::optional<double> best_cut;
  double best_left = 0;
  for (std::size_t i = 0; i + 1 < known.size(); ++i) {
    const auto k = static_cast<std::size_t>(codes[known[i]]);
    left[k] += 1;
    right[k] -= 1;
    const double x = ds.at(known[i], c).as_number();
    const double y = ds.at(known[i + 1], c).as_number();
    if (x == y) continue;
    const double n_left = static_cast<double>(i + 1);
    if (i + 1 < min_leaf || known.size() - (i + 1) < min_leaf) continue;
    const double remainder =
        n_left / n_known * entropy(left) + (n_known - n_left) / n_known * entropy(right);
    if (!best_cut || remainder < best_remainder) {
      best_remainder = remainder;
      best_cut = (x + y) / 2;
      best_left = n_left;
    }
  }
  if (!best_cut) return s;
  const double sizes[2] = {best_left, n_known - best_left};
  finish(best_remainder, sizes);
  s.threshold = best_cut;
  return s;
}

}  // namespace info_detail

/// Information gain and gain ratio of every non-target attribute against a
/// nominal target, best first. Rows with a Missing class are ignored; ties
/// keep schema order.
inline std::vector<AttributeScore> attribute_scores(const Dataset& ds, std::string_view target) {
  const auto t = ds.index_of(target);
  if (ds.schema()[t].kind != AttributeKind::Nominal)
    throw SchemaError("target '" + std::string(target) + "' must be nominal");
  if (ds.num_attributes() < 2) throw ArgumentError("dataset has no attribute besides the target");
  const auto enc = info_detail::encode_target(ds, t);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    if (enc.codes[r] >= 0) rows.push_back(r);

  std::vector<AttributeScore> out;
  for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
    if (c == t) continue;
    if (rows.empty()) {
      out.push_back({ds.schema()[c].name, 0, 0, 0, std::nullopt});
      continue;
    }
    out.push_back(info_detail::score_attribute(ds, c, rows, enc.codes, enc.classes.size(), 1));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AttributeScore& a, const AttributeScore& b) { return a.gain_ratio > b.gain_ratio; });
  return out;
}

}  // namespace fieldscan
