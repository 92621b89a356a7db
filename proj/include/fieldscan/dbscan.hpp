#pragma once

#include <deque>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/distance.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/pairwise.hpp"

namespace fieldscan {

inline constexpr int kNoise = -1;

struct DbscanResult {
  std::vector<int> labels;  // cluster id from 0, or kNoise
  std::vector<bool> core;
  double eps = 0;
  std::size_t min_pts = 0;
  std::size_t n_clusters = 0;

  bool is_noise(std::size_t i) const { return labels[i] == kNoise; }
};

/// DBSCAN with a fully determined labelling.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Clusters are the connected components of core points under
/// the eps relation, numbered by their lowest row. A non-core point joins the
/// cluster of the lowest-indexed core point within eps, or is Noise.
template <DistanceSource D>
DbscanResult dbscan(const D& dist, double eps, std::size_t min_pts) {
  if (!(eps > 0)) throw ArgumentError("DBSCAN eps must be positive");
  if (min_pts < 1) throw ArgumentError("DBSCAN min_pts must be at least 1");
  const std::size_t n = dist.size();
  DbscanResult out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.labels.assign(n, kNoise);
  out.core.assign(n, false);

  for (std::size_t p = 0; p < n; ++p) {
    std::size_t count = 0;
    for (std::size_t q = 0; q < n && count < min_pts; ++q)
      if (dist(p, q) <= eps) ++count;
    out.core[p] = count >= min_pts;
  }

  int next_id = 0;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!out.core[seed] || out.labels[seed] != kNoise) continue;
    const int id = next_id++;
    out.labels[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const auto p = queue.front();
      queue.pop_front();
      for (std::size_t q = 0; q < n; ++q) {
        if (!out.core[q] || out.labels[q] != kNoise) continue;
        if (dist(p, q) <= eps) {
          out.labels[q] = id;
          queue.push_back(q);
        }
      }
    }
  }

  for (std::size_t b = 0; b < n; ++b) {
    if (out.core[b]) continue;
    for (std::size_t p = 0; p < n; ++p)
      if (out.core[p] && dist(b, p) <= eps) {
        out.labels[b] = out.labels[p];
        break;
      }
  }
  out.n_clusters = static_cast<std::size_t>(next_id);
  return out;
}

/// DBSCAN on a dataset under the Gower distance.
inline DbscanResult dbscan(const Dataset& ds, double eps, std::size_t min_pts) {
  if (!(eps > 0)) throw ArgumentError("DBSCAN eps must be positive");
  return dbscan(GowerMetric(ds), eps, min_pts);
}

}  // namespace fieldscan
