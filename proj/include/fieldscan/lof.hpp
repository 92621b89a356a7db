#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/distance.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/pairwise.hpp"

namespace fieldscan {

/// Local reachability density assigned when a point's whole neighbourhood
/// sits at distance 0 (duplicates).
inline constexpr double kLrdCap = 1e12;

struct LofResult {
  std::vector<double> scores;
  std::size_t k = 0;
  std::vector<double> k_distance;
  std::vector<double> lrd;
};

/// Local Outlier Factor over any distance source.
///
/// The k-distance neighbourhood of p holds every other point no farther than
/// its k-th nearest neighbour, ties included. lrd(p) is the inverse mean
/// reachability distance max(k-distance(o), d(p, o)) over the neighbourhood,
/// capped at kLrdCap when that mean is 0; points with a capped lrd score
/// exactly 1. The score is the mean of lrd(o) / lrd(p) over neighbours o.
template <DistanceSource D>
LofResult lof_scores(const D& dist, std::size_t k) {
  const std::size_t n = dist.size();
  if (n < 2) throw ArgumentError("LOF needs at least 2 rows");
  if (k < 1 || k >= n) throw ArgumentError("LOF k must satisfy 1 <= k < row count");

  std::vector<std::vector<std::pair<double, std::size_t>>> hood(n);
  LofResult out;
  out.k = k;
  out.k_distance.resize(n);
  std::vector<std::pair<double, std::size_t>> row;
  row.reserve(n - 1);
  for (std::size_t p = 0; p < n; ++p) {
    row.clear();
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) row.emplace_back(dist(p, q), q);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    const double kd = row[k - 1].first;
    out.k_distance[p] = kd;
    auto& h = hood[p];
    for (const auto& e : row)
      if (e.first <= kd) h.push_back(e);
    std::sort(h.begin(), h.end());
  }

  out.lrd.resize(n);
  std::vector<char> capped(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0;
    for (const auto& [d, o] : hood[p]) sum += std::max(out.k_distance[o], d);
    const double mean = sum / static_cast<double>(hood[p].size());
    capped[p] = !(mean > 0);
    out.lrd[p] = capped[p] ? kLrdCap : 1.0 / mean;
  }

  out.scores.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    if (capped[p]) {
      out.scores[p] = 1.0;
      continue;
    }
    double sum = 0;
    for (const auto& e : hood[p]) sum += out.lrd[e.second] / out.lrd[p];
    out.scores[p] = sum / static_cast<double>(hood[p].size());
  }
  return out;
}

/// LOF on a dataset under the Gower distance.
inline LofResult lof_scores(const Dataset& ds, std::size_t k) {
  if (ds.num_rows() < 2) throw ArgumentError("LOF needs at least 2 rows");
  return lof_scores(GowerMetric(ds), k);
}

/// score > threshold, strictly.
inline std::vector<bool> lof_flag(const LofResult& result, double threshold) {
  if (!(threshold > 0)) throw ArgumentError("LOF threshold must be positive");
  std::vector<bool> flags(result.scores.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = result.scores[i] > threshold;
  return flags;
}

}  // namespace fieldscan
