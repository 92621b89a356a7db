#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/random.hpp"
#include "fieldscan/stats.hpp"

namespace fieldscan {

/// Real-valued view of a mixed dataset: z-scored numeric attributes (Missing
/// imputed with the column mean, i.e. 0) and one 0/1 indicator per nominal
/// label (Missing is all zeros).
struct Embedding {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> data;               // row-major
  std::vector<std::size_t> owner;         // coordinate -> attribute position
  std::vector<std::string> coordinate;    // "attr" or "attr=label"
  std::vector<std::string> attributes;    // schema names

  const double* point(std::size_t r) const { return &data[r * dims]; }
};

inline Embedding embed(const Dataset& ds) {
  Embedding e;
  e.rows = ds.num_rows();
  for (const auto& a : ds.schema().attributes()) e.attributes.push_back(a.name);

  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
    const auto& attr = ds.schema()[c];
    if (attr.kind == AttributeKind::Numeric) {
      const auto st = column_stats(ds, attr.name);
      const double sd = st.std_dev.value_or(0.0);
      std::vector<double> col(e.rows, 0.0);
      for (std::size_t r = 0; r < e.rows; ++r) {
        const auto& v = ds.at(r, c);
        if (v.is_number() && sd > 0) col[r] = (v.as_number() - *st.mean) / sd;
      }
      columns.push_back(std::move(col));
      e.owner.push_back(c);
      e.coordinate.push_back(attr.name);
    } else {
      std::map<std::string, std::size_t> index;
      const std::size_t first = columns.size();
      for (std::size_t r = 0; r < e.rows; ++r) {
        const auto& v = ds.at(r, c);
        if (v.is_missing()) continue;
        auto [it, fresh] = index.try_emplace(v.as_label(), columns.size() - first);
        if (fresh) {
          columns.emplace_back(e.rows, 0.0);
          e.owner.push_back(c);
          e.coordinate.push_back(attr.name + "=" + v.as_label());
        }
        columns[first + it->second][r] = 1.0;
      }
    }
  }
  e.dims = columns.size();
  e.data.resize(e.rows * e.dims);
  for (std::size_t r = 0; r < e.rows; ++r)
    for (std::size_t d = 0; d < e.dims; ++d) e.data[r * e.dims + d] = columns[d][r];
  return e;
}

struct Clustering {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;
  double inertia = 0;
  std::vector<double> inertia_trace;  // after each assignment + update step
  std::size_t iterations = 0;
  std::vector<std::size_t> owner;     // embedding coordinate -> attribute position
  std::vector<std::string> attributes;
};

inline double squared_distance(const double* a, const double* b, std::size_t dims) {
  double s = 0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

/// k-means++ seeding: the first centre is a uniform draw; each further centre
/// is drawn with probability proportional to the squared distance to the
/// nearest chosen centre (first row whose running total exceeds u * total).
/// When every point coincides with a centre the lowest unused row is taken.
inline std::vector<std::size_t> kmeanspp_seeds(const Embedding& e, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > e.rows) throw ArgumentError("k-means k must satisfy 1 <= k <= row count");
  Rng rng(seed);
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(e.rows))};
  std::vector<double> nearest(e.rows);
  for (std::size_t r = 0; r < e.rows; ++r) nearest[r] = squared_distance(e.point(r), e.point(chosen[0]), e.dims);
  while (chosen.size() < k) {
    double total = 0;
    for (double d : nearest) total += d;
    const double u = rng.uniform();
    std::size_t pick = e.rows;
    if (total > 0) {
      const double target = u * total;
      double running = 0;
      for (std::size_t r = 0; r < e.rows; ++r) {
        if (nearest[r] <= 0) continue;
        running += nearest[r];
        pick = r;
        if (running > target) break;
      }
    } else {
      for (std::size_t r = 0; r < e.rows; ++r)
        if (std::find(chosen.begin(), chosen.end(), r) == chosen.end()) {
          pick = r;
          break;
        }
    }
    chosen.push_back(pick);
    for (std::size_t r = 0; r < e.rows; ++r)
      nearest[r] = std::min(nearest[r], squared_distance(e.point(r), e.point(pick), e.dims));
  }
  return chosen;
}

/// Lloyd iterations from the given centres. Each step assigns every point to
/// its nearest centre (ties: lower index), repairs empty clusters by moving
/// in the point farthest from its centre (taken from clusters with more than
/// one member), then recomputes centres as means. Stops when an assignment
/// repeats or after `max_iter` steps.
inline Clustering lloyd(const Embedding& e, std::vector<std::vector<double>> centroids, std::size_t max_iter) {
  const std::size_t k = centroids.size();
  if (k < 1 || k > e.rows) throw ArgumentError("k-means k must satisfy 1 <= k <= row count");
  if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");
  Clustering c;
  c.k = k;
  c.owner = e.owner;
  c.attributes = e.attributes;
  std::vector<std::size_t> previous;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::vector<std::size_t> assign(e.rows, 0);
    std::vector<double> dist(e.rows, 0.0);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t r = 0; r < e.rows; ++r) {
      double best = INFINITY;
      for (std::size_t j = 0; j < k; ++j) {
        const double d = squared_distance(e.point(r), centroids[j].data(), e.dims);
        if (d < best) {
          best = d;
          assign[r] = j;
        }
      }
      dist[r] = best;
      ++members[assign[r]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (members[j] > 0) continue;
      std::size_t far = e.rows;
      for (std::size_t r = 0; r < e.rows; ++r)
        if (members[assign[r]] > 1 && (far == e.rows || dist[r] > dist[far])) far = r;
      --members[assign[far]];
      assign[far] = j;
      members[j] = 1;
      dist[far] = 0;
      centroids[j].assign(e.point(far), e.point(far) + e.dims);
    }
    for (std::size_t j = 0; j < k; ++j) std::fill(centroids[j].begin(), centroids[j].end(), 0.0);
    for (std::size_t r = 0; r < e.rows; ++r)
      for (std::size_t d = 0; d < e.dims; ++d) centroids[assign[r]][d] += e.point(r)[d];
    for (std::size_t j = 0; j < k; ++j)
      for (auto& x : centroids[j]) x /= static_cast<double>(members[j]);
    double inertia = 0;
    for (std::size_t r = 0; r < e.rows; ++r) inertia += squared_distance(e.point(r), centroids[assign[r]].data(), e.dims);
    c.inertia_trace.push_back(inertia);
    c.iterations = iter + 1;
    const bool stable = assign == previous;
    previous = std::move(assign);
    if (stable) break;
  }
  c.assignment = std::move(previous);
  c.centroids = std::move(centroids);
  c.inertia = c.inertia_trace.back();
  return c;
}

/// Best of `n_init` k-means++ / Lloyd runs by inertia (first run wins ties).
/// Run i is seeded with the i-th draw of an Rng seeded with `seed`.
inline Clustering kmeans(const Embedding& e, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100,
                         std::size_t n_init = 25) {
  if (n_init < 1) throw ArgumentError("n_init must be at least 1");
  Rng seeds(seed);
  Clustering best;
  for (std::size_t run = 0; run < n_init; ++run) {
    std::vector<std::vector<double>> init;
    for (auto s : kmeanspp_seeds(e, k, seeds.next())) init.emplace_back(e.point(s), e.point(s) + e.dims);
    auto c = lloyd(e, std::move(init), max_iter);
    if (run == 0 || c.inertia < best.inertia) best = std::move(c);
  }
  return best;
}

/// Seeded k-means on the embedding of `ds`.
inline Clustering kmeans(const Dataset& ds, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100,
                         std::size_t n_init = 25) {
  if (k < 1 || k > ds.num_rows()) throw ArgumentError("k-means k must satisfy 1 <= k <= row count");
  return kmeans(embed(ds), k, seed, max_iter, n_init);
}

struct AttributeDistance {
  std::string attribute;
  std::size_t index = 0;  // schema position
  double distance = 0;
};

/// Attributes ordered by how far apart two centroids sit on them.
struct AttributeRanking {
  std::vector<AttributeDistance> entries;
};

/// Per-attribute gap between the two centroids of a 2-clustering: absolute
/// difference on a numeric coordinate, Euclidean norm over a nominal
/// attribute's indicator block. Sorted by distance, then name.
inline AttributeRanking centroid_attribute_distances(const Clustering& c, const Dataset& ds) {
  if (c.k != 2) throw ArgumentError("attribute ranking needs a clustering with k = 2");
  if (c.attributes.size() != ds.num_attributes())
    throw SchemaError("clustering was not built on this dataset's schema");
  for (std::size_t i = 0; i < c.attributes.size(); ++i)
    if (c.attributes[i] != ds.schema()[i].name) throw SchemaError("clustering was not built on this dataset's schema");

  std::vector<double> sq(ds.num_attributes(), 0.0);
  for (std::size_t d = 0; d < c.owner.size(); ++d) {
    const double diff = c.centroids[0][d] - c.centroids[1][d];
    sq[c.owner[d]] += diff * diff;
  }
  AttributeRanking out;
  for (std::size_t a = 0; a < ds.num_attributes(); ++a)
    out.entries.push_back({ds.schema()[a].name, a, std::sqrt(sq[a])});
  std::sort(out.entries.begin(), out.entries.end(), [](const AttributeDistance& x, const AttributeDistance& y) {
    if (x.distance != y.distance) return x.distance > y.distance;
    return x.attribute < y.attribute;
  });
  return out;
}

}  // namespace fieldscan
