#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/random.hpp"
#include "fieldscan/stats.hpp"

namespace fieldscan {

/// One generated column: normal(mean, std) for numeric, a categorical
/// distribution for nominal. `decimals` >= 0 rounds numeric draws.
struct ColumnSpec {
  std::string name;
  AttributeKind kind = AttributeKind::Numeric;
  double mean = 0;
  double std_dev = 1;
  int decimals = -1;
  std::vector<std::pair<std::string, double>> distribution;

  static ColumnSpec numeric(std::string name, double mean, double std_dev, int decimals = -1) {
    return {std::move(name), AttributeKind::Numeric, mean, std_dev, decimals, {}};
  }
  static ColumnSpec nominal(std::string name, std::vector<std::pair<std::string, double>> distribution) {
    return {std::move(name), AttributeKind::Nominal, 0, 0, -1, std::move(distribution)};
  }
};

struct SynthSpec {
  std::size_t n_rows = 0;
  std::vector<ColumnSpec> columns;
  std::optional<ColumnSpec> target;  // nominal, appended last
  std::uint64_t seed = 0;

  void validate() const {
    if (n_rows < 1) throw ArgumentError("n_rows must be at least 1");
    auto check = [](const ColumnSpec& c) {
      if (c.kind == AttributeKind::Numeric) {
        if (!(c.std_dev >= 0) || !std::isfinite(c.mean)) throw ArgumentError("column '" + c.name + "': invalid normal");
        return;
      }
      if (c.distribution.empty()) throw ArgumentError("column '" + c.name + "': empty distribution");
      double total = 0;
      for (const auto& [label, p] : c.distribution) {
        if (!(p >= 0) || label.empty()) throw ArgumentError("column '" + c.name + "': invalid distribution entry");
        total += p;
      }
      if (std::fabs(total - 1.0) > 1e-9) throw ArgumentError("column '" + c.name + "': probabilities must sum to 1");
    };
    for (const auto& c : columns) check(c);
    if (target) {
      if (target->kind != AttributeKind::Nominal) throw ArgumentError("target column must be nominal");
      check(*target);
    }
  }
};

/// Seeded synthetic table; cells are drawn row by row, column by column.
inline Dataset generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<ColumnSpec> cols = spec.columns;
  if (spec.target) cols.push_back(*spec.target);
  std::vector<Attribute> attrs;
  for (const auto& c : cols) attrs.push_back({c.name, c.kind});
  Schema schema(std::move(attrs));

  Rng rng(spec.seed);
  std::vector<Row> rows(spec.n_rows);
  for (auto& row : rows) {
    row.reserve(cols.size());
    for (const auto& c : cols) {
      if (c.kind == AttributeKind::Numeric) {
        double x = c.mean + c.std_dev * rng.normal();
        if (c.decimals >= 0) {
          const double scale = std::pow(10.0, c.decimals);
          x = std::round(x * scale) / scale;
        }
        row.emplace_back(x);
      } else {
        const double u = rng.uniform();
        double running = 0;
        std::size_t pick = c.distribution.size() - 1;
        for (std::size_t i = 0; i < c.distribution.size(); ++i) {
          running += c.distribution[i].second;
          if (u < running) {
            pick = i;
            break;
          }
        }
        row.emplace_back(c.distribution[pick].first);
      }
    }
  }
  return Dataset(std::move(schema), std::move(rows));
}

enum class AnomalyKind { PointOutlier, LabelNoise, MissingBurst };

inline std::string_view to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::PointOutlier: return "point_outlier";
    case AnomalyKind::LabelNoise: return "label_noise";
    case AnomalyKind::MissingBurst: return "missing_burst";
  }
  return "point_outlier";
}

/// Side of the mean a point outlier lands on.
enum class OutlierSign { Both, Above, Below };

struct InjectionSpec {
  double rate = 0.05;
  std::vector<AnomalyKind> kinds{AnomalyKind::PointOutlier};
  std::vector<std::string> target_attrs;
  std::uint64_t seed = 0;
  double magnitude = 8;  // point outliers move the cell by +/- magnitude * std
  OutlierSign sign = OutlierSign::Both;
};

struct InjectedCell {
  RowId row_id = 0;
  std::string attribute;
  AnomalyKind kind = AnomalyKind::PointOutlier;
  Value before;
  Value after;
};

struct Injection {
  Dataset data;
  std::vector<bool> truth;
  std::vector<InjectedCell> cells;
};

/// Corrupts ceil(rate * n) distinct rows, one cell each. For every chosen row
/// (ascending order) an attribute is drawn from `target_attrs`, then a kind
/// among those applicable to it: point outliers need a numeric column with
/// positive spread, label noise a nominal column with two or more labels.
inline Injection inject(const Dataset& ds, const InjectionSpec& spec) {
  if (!(spec.rate > 0 && spec.rate < 0.5)) throw ArgumentError("injection rate must lie in (0, 0.5)");
  if (!(spec.magnitude > 0)) throw ArgumentError("point outlier magnitude must be positive");
  if (spec.kinds.empty()) throw ArgumentError("at least one anomaly kind is required");
  if (spec.target_attrs.empty()) throw ArgumentError("at least one target attribute is required");
  const std::size_t n = ds.num_rows();
  const auto count = static_cast<std::size_t>(std::ceil(spec.rate * static_cast<double>(n) - 1e-9));
  if (count == 0) throw ArgumentError("injection rate selects no rows");

  struct Target {
    std::size_t column;
    std::vector<AnomalyKind> kinds;
    double mean = 0;
    double std_dev = 0;
    std::vector<std::string> labels;
  };
  std::vector<Target> targets;
  for (const auto& name : spec.target_attrs) {
    Target t{ds.index_of(name), {}, 0, 0, {}};
    const auto st = column_stats(ds, name);
    if (ds.schema()[t.column].kind == AttributeKind::Numeric) {
      t.mean = st.mean.value_or(0);
      t.std_dev = st.std_dev.value_or(0);
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const auto& v = ds.at(r, t.column);
        if (v.is_label() && std::find(t.labels.begin(), t.labels.end(), v.as_label()) == t.labels.end())
          t.labels.push_back(v.as_label());
      }
    }
    for (auto k : spec.kinds) {
      const bool ok = (k == AnomalyKind::PointOutlier && ds.schema()[t.column].kind == AttributeKind::Numeric &&
                       t.std_dev > 0) ||
                      (k == AnomalyKind::LabelNoise && t.labels.size() >= 2) || k == AnomalyKind::MissingBurst;
      if (ok && std::find(t.kinds.begin(), t.kinds.end(), k) == t.kinds.end()) t.kinds.push_back(k);
    }
    if (t.kinds.empty()) throw ArgumentError("no configured anomaly kind applies to attribute '" + name + "'");
    targets.push_back(std::move(t));
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  auto rows = ds.rows();
  Injection out;
  out.truth.assign(n, false);
  for (auto r : chosen) {
    const auto& t = targets[rng.below(targets.size())];
    const auto kind = t.kinds[rng.below(t.kinds.size())];
    auto& cell = rows[r][t.column];
    InjectedCell rec{ds.row_id(r), ds.schema()[t.column].name, kind, cell, {}};
    switch (kind) {
      case AnomalyKind::PointOutlier: {
        double sign = spec.sign == OutlierSign::Below ? -1.0 : 1.0;
        if (spec.sign == OutlierSign::Both && rng.uniform() < 0.5) sign = -1.0;
        const double base = cell.is_number() ? cell.as_number() : t.mean;
        cell = Value(base + sign * spec.magnitude * t.std_dev);
        break;
      }
      case AnomalyKind::LabelNoise: {
        std::vector<std::string> others;
        for (const auto& l : t.labels)
          if (!cell.is_label() || l != cell.as_label()) others.push_back(l);
        cell = Value(others[rng.below(others.size())]);
        break;
      }
      case AnomalyKind::MissingBurst:
        cell = Value();
        break;
    }
    rec.after = cell;
    out.truth[r] = true;
    out.cells.push_back(std::move(rec));
  }
  out.data = Dataset(ds.schema(), std::move(rows), ds.row_ids());
  return out;
}

struct EvalResult {
  double precision = 1;
  double recall = 1;
  double f1 = 1;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Precision, recall and F1 of `flags` against `truth`; 0/0 ratios are 1.
inline EvalResult evaluate(const std::vector<bool>& flags, const std::vector<bool>& truth) {
  if (flags.size() != truth.size()) throw ArgumentError("flags and truth differ in length");
  EvalResult e;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && truth[i]) ++e.tp;
    else if (flags[i]) ++e.fp;
    else if (truth[i]) ++e.fn;
    else ++e.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  e.precision = ratio(e.tp, e.tp + e.fp);
  e.recall = ratio(e.tp, e.tp + e.fn);
  e.f1 = e.precision + e.recall > 0 ? 2 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
  return e;
}

/// 24 attributes named and typed after a real-estate affidavit export:
/// identifiers, years, amounts and areas as numbers; a few categorical fields
/// spread over several labels, the rest nearly constant with a rare
/// alternative.
inline SynthSpec affidavit_like_spec(std::size_t n_rows, std::uint64_t seed, double rare = 0.005) {
  using C = ColumnSpec;
  const auto skewed = [rare](std::string name, std::string common, std::string odd) {
    return C::nominal(std::move(name), {{std::move(common), 1 - rare}, {std::move(odd), rare}});
  };
  SynthSpec s;
  s.n_rows = n_rows;
  s.seed = seed;
  s.columns = {
      C::numeric("ddjj_id", 20000, 5000, 0),
      C::numeric("ano", 2010, 3, 0),
      skewed("tipo_ddjj", "Anual", "Inicial"),
      C::nominal("poder", {{"Legislativo", 0.55}, {"Ejecutivo", 0.3}, {"Judicial", 0.15}}),
      C::numeric("persona_id", 1500, 400, 0),
      skewed("nombre", "Titular", "Apoderado"),
      C::numeric("ingreso", 2008, 3, 0),
      C::nominal("cargo", {{"Diputado", 0.5}, {"Senador", 0.5}}),
      skewed("jurisdiccion", "Nacional", "Provincial"),
      C::numeric("cant_acciones", 100, 25, 0),
      skewed("descripcion_del_bien", "Casa", "Lote"),
      skewed("destino", "Vivienda", "Comercial"),
      skewed("localidad", "CABA", "La Plata"),
      skewed("nombre_bien_s", "Inmueble", "Cochera"),
      skewed("origen", "Compra", "Herencia"),
      skewed("pais", "Argentina", "Uruguay"),
      C::numeric("porcentaje", 50, 10, 2),
      skewed("provincia", "Buenos Aires", "Santa Fe"),
      skewed("tipo_bien_s", "Inmueble", "Terreno"),
      skewed("titular_dominio", "Titular", "Conyuge"),
      skewed("vinculo", "Titular", "Conviviente"),
      C::numeric("superficiem2", 250, 60, 2),
      C::nominal("val_decl", {{"Fiscal", 0.5}, {"Subfiscal", 0.3}, {"Market", 0.2}}),
      C::numeric("valor_patrim", 400000, 90000, 2),
  };
  return s;
}

}  // namespace fieldscan
