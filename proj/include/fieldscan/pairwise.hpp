#pragma once

#include <concepts>
#include <cstddef>
#include <utility>
#include <vector>

namespace fieldscan {

/// Anything that yields a symmetric distance between items 0..size()-1.
template <class D>
concept DistanceSource = requires(const D& d, std::size_t i, std::size_t j) {
  { d.size() } -> std::convertible_to<std::size_t>;
  { d(i, j) } -> std::convertible_to<double>;
};

/// Condensed upper-triangle cache of a distance source. Values are copied
/// verbatim, so detectors see exactly the distances the source produces.
class PairwiseDistances {
 public:
  template <DistanceSource D>
  explicit PairwiseDistances(const D& source) : n_(source.size()) {
    values_.resize(n_ < 2 ? 0 : n_ * (n_ - 1) / 2);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) values_[k++] = source(i, j);
  }

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return values_[i * (2 * n_ - i - 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

}  // namespace fieldscan
