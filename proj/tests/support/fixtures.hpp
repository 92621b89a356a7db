#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldscan/fieldscan.hpp"

namespace fixtures {

using namespace fieldscan;

inline Dataset csv(std::string_view text, CsvOptions opts = {}) { return load_csv(text, opts); }

/// The 14-row play/don't-play weather table with nominal attributes.
inline Dataset weather_nominal() {
  return csv(
      "outlook,temperature,humidity,windy,play\n"
      "sunny,hot,high,false,no\n"
      "sunny,hot,high,true,no\n"
      "overcast,hot,high,false,yes\n"
      "rainy,mild,high,false,yes\n"
      "rainy,cool,normal,false,yes\n"
      "rainy,cool,normal,true,no\n"
      "overcast,cool,normal,true,yes\n"
      "sunny,mild,high,false,no\n"
      "sunny,cool,normal,false,yes\n"
      "rainy,mild,normal,false,yes\n"
      "sunny,mild,normal,true,yes\n"
      "overcast,mild,high,true,yes\n"
      "overcast,hot,normal,false,yes\n"
      "rainy,mild,high,true,no\n");
}

/// Same table with numeric temperature and humidity.
inline Dataset weather_numeric() {
  return csv(
      "outlook,temperature,humidity,windy,play\n"
      "sunny,85,85,false,no\n"
      "sunny,80,90,true,no\n"
      "overcast,83,86,false,yes\n"
      "rainy,70,96,false,yes\n"
      "rainy,68,80,false,yes\n"
      "rainy,65,70,true,no\n"
      "overcast,64,65,true,yes\n"
      "sunny,72,95,false,no\n"
      "sunny,69,70,false,yes\n"
      "rainy,75,80,false,yes\n"
      "sunny,75,70,true,yes\n"
      "overcast,72,90,true,yes\n"
      "overcast,81,75,false,yes\n"
      "rainy,71,91,true,no\n");
}

struct RandomShape {
  std::size_t rows = 32;
  std::size_t numeric = 2;
  std::size_t nominal = 1;
  std::size_t labels = 3;
  double missing = 0.0;     // per-cell probability
  double duplicate = 0.0;   // probability a row copies an earlier one
};

/// Mixed-type table of Gaussian blobs: numeric columns centred on one of two
/// means, nominal labels drawn uniformly.
inline Dataset random_dataset(std::uint64_t seed, const RandomShape& shape) {
  Rng rng(seed);
  std::vector<Attribute> attrs;
  for (std::size_t i = 0; i < shape.numeric; ++i) attrs.push_back({"x" + std::to_string(i), AttributeKind::Numeric});
  for (std::size_t i = 0; i < shape.nominal; ++i) attrs.push_back({"c" + std::to_string(i), AttributeKind::Nominal});
  std::vector<Row> rows;
  for (std::size_t r = 0; r < shape.rows; ++r) {
    if (r > 0 && rng.uniform() < shape.duplicate) {
      rows.push_back(rows[rng.below(r)]);
      continue;
    }
    Row row;
    const double centre = rng.uniform() < 0.5 ? 0.0 : 5.0;
    for (std::size_t i = 0; i < shape.numeric; ++i) row.emplace_back(centre + rng.normal());
    for (std::size_t i = 0; i < shape.nominal; ++i)
      row.emplace_back("L" + std::to_string(rng.below(shape.labels)));
    for (auto& v : row)
      if (rng.uniform() < shape.missing) v = Value();
    rows.push_back(std::move(row));
  }
  return Dataset(Schema(attrs), std::move(rows));
}

/// Shape of the i-th oracle fixture: sizes 8..64, varying column mixes,
/// some with Missing cells or duplicate rows.
inline RandomShape oracle_shape(std::size_t i) {
  RandomShape s;
  s.rows = 8 + (i * 7) % 57;
  s.numeric = 1 + i % 3;
  s.nominal = i % 4 == 3 ? 0 : 1 + i % 2;
  s.labels = 2 + i % 3;
  s.missing = i % 5 == 4 ? 0.05 : 0.0;
  s.duplicate = i % 6 == 5 ? 0.15 : 0.0;
  return s;
}

inline std::vector<std::size_t> indices_of(const std::vector<bool>& flags) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out.push_back(i);
  return out;
}

}  // namespace fixtures
