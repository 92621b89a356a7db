#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fieldscan/csv.hpp"
#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"

namespace fieldscan {

// ---------------------------------------------------------------------------
// Exchange rates and price index.

/// Pesos per unit of foreign currency, by (currency, year).
class FxTable {
 public:
  FxTable() = default;

  void add(std::string currency, int year, double rate) {
    if (!(rate > 0) || !std::isfinite(rate))
      throw DataError("exchange rate for " + currency + " " + std::to_string(year) + " must be positive");
    rates_[{std::move(currency), year}] = rate;
  }

  std::optional<double> find(const std::string& currency, int year) const {
    auto it = rates_.find({currency, year});
    if (it == rates_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return rates_.size(); }

  /// CSV with columns currency,year,rate.
  static FxTable from_csv(std::string_view text) {
    CsvOptions opts;
    opts.kind_hints = {{"currency", AttributeKind::Nominal}, {"year", AttributeKind::Numeric},
                       {"rate", AttributeKind::Numeric}};
    const auto ds = load_csv(text, opts);
    FxTable t;
    const auto cc = ds.index_of("currency");
    const auto cy = ds.index_of("year");
    const auto cr = ds.index_of("rate");
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      if (ds.at(r, cc).is_missing() || ds.at(r, cy).is_missing() || ds.at(r, cr).is_missing())
        throw DataError("exchange-rate table row " + std::to_string(r + 1) + " is incomplete");
      t.add(ds.at(r, cc).as_label(), whole_year(ds.at(r, cy).as_number()), ds.at(r, cr).as_number());
    }
    return t;
  }

  static int whole_year(double y) {
    if (y != std::floor(y)) throw DataError("year " + format_number(y) + " is not a whole number");
    return static_cast<int>(y);
  }

 private:
  std::map<std::pair<std::string, int>, double> rates_;
};

/// Price-index levels by year, with the base year prices are expressed in.
class CpiTable {
 public:
  CpiTable() = default;
  CpiTable(std::map<int, double> levels, int base_year) : levels_(std::move(levels)), base_year_(base_year) {
    for (const auto& [year, level] : levels_)
      if (!(level > 0) || !std::isfinite(level))
        throw DataError("price index for " + std::to_string(year) + " must be positive");
    if (!levels_.count(base_year_))
      throw DataError("base year " + std::to_string(base_year_) + " is missing from the price index");
  }

  int base_year() const noexcept { return base_year_; }

  std::optional<double> level(int year) const {
    auto it = levels_.find(year);
    if (it == levels_.end()) return std::nullopt;
    return it->second;
  }

  /// CSV with columns year,index.
  static CpiTable from_csv(std::string_view text, int base_year) {
    const auto ds = load_csv(text);
    const auto cy = ds.index_of("year");
    const auto ci = ds.index_of("index");
    std::map<int, double> levels;
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      if (ds.at(r, cy).is_missing() || ds.at(r, ci).is_missing() || !ds.at(r, cy).is_number() ||
          !ds.at(r, ci).is_number())
        throw DataError("price-index table row " + std::to_string(r + 1) + " is incomplete");
      levels[FxTable::whole_year(ds.at(r, cy).as_number())] = ds.at(r, ci).as_number();
    }
    return CpiTable(std::move(levels), base_year);
  }

 private:
  std::map<int, double> levels_;
  int base_year_ = 0;
};

/// Amount in constant pesos of the base year:
/// amount x fx(currency, year) x cpi(base) / cpi(year). Pesos convert at 1.
inline double convert_valuation(double amount, const std::string& currency, int year, const FxTable& fx,
                                const CpiTable& cpi, const std::string& peso_code = "ARS") {
  double rate = 1.0;
  if (currency != peso_code) {
    auto r = fx.find(currency, year);
    if (!r) throw DataError("no exchange rate for " + currency + " in " + std::to_string(year));
    rate = *r;
  }
  const auto level = cpi.level(year);
  if (!level) throw DataError("no price index for " + std::to_string(year));
  const double inflation = *cpi.level(cpi.base_year()) / *level;
  return amount * rate * inflation;
}

// ---------------------------------------------------------------------------
// Areas.

enum class AreaUnit { SquareMetre, Hectare, SquareKilometre, SquareFoot };

inline double square_metres_per(AreaUnit unit) {
  switch (unit) {
    case AreaUnit::SquareMetre: return 1.0;
    case AreaUnit::Hectare: return 10000.0;
    case AreaUnit::SquareKilometre: return 1000000.0;
    case AreaUnit::SquareFoot: return 0.09290304;
  }
  return 1.0;
}

inline AreaUnit parse_area_unit(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "m2") return AreaUnit::SquareMetre;
  if (s == "ha") return AreaUnit::Hectare;
  if (s == "km2") return AreaUnit::SquareKilometre;
  if (s == "ft2") return AreaUnit::SquareFoot;
  throw DataError("unknown area unit '" + std::string(text) + "'");
}

inline double homogenize_area(double value, AreaUnit unit) {
  if (value < 0) throw DataError("area must be non-negative, got " + format_number(value));
  return value * square_metres_per(unit);
}

// ---------------------------------------------------------------------------
// Declared-value class.

enum class DeclaredValue { Fiscal, Subfiscal, Market, NotDeclared };

inline std::string_view to_label(DeclaredValue v) {
  switch (v) {
    case DeclaredValue::Fiscal: return "Fiscal";
    case DeclaredValue::Subfiscal: return "Subfiscal";
    case DeclaredValue::Market: return "Market";
    case DeclaredValue::NotDeclared: return "NotDeclared";
  }
  return "NotDeclared";
}

struct DeclaredClass {
  DeclaredValue value = DeclaredValue::NotDeclared;
  std::optional<std::string> warning;
};

/// Classifies a declared amount against its fiscal reference by the ratio
/// r = declared / reference: below 1 - tolerance is Subfiscal, above
/// 1 + tolerance is Market, anything between is Fiscal. Missing or zero
/// declarations are NotDeclared.
inline DeclaredClass classify_declared_value(std::optional<double> declared, std::optional<double> reference,
                                             double tolerance = 0.10) {
  if (!(tolerance > 0 && tolerance < 1)) throw ArgumentError("tolerance must lie in (0, 1)");
  if (!declared || *declared == 0) return {DeclaredValue::NotDeclared, std::nullopt};
  if (!reference) return {DeclaredValue::NotDeclared, "fiscal reference missing; declared value not classifiable"};
  if (*reference == 0) {
    if (*declared > 0) return {DeclaredValue::Market, "fiscal reference is 0; declared value exceeds it"};
    return {DeclaredValue::Subfiscal, "fiscal reference is 0; declared value is below it"};
  }
  const double r = *declared / *reference;
  if (r < 1 - tolerance) return {DeclaredValue::Subfiscal, std::nullopt};
  if (r > 1 + tolerance) return {DeclaredValue::Market, std::nullopt};
  return {DeclaredValue::Fiscal, std::nullopt};
}

// ---------------------------------------------------------------------------
// Pipeline.

/// Projection onto `keep`. Unknown names are reported together.
inline Dataset select_attributes(const Dataset& raw, const std::vector<std::string>& keep) {
  if (keep.empty()) throw ArgumentError("attribute selection is empty");
  std::string unknown;
  for (const auto& name : keep)
    if (!raw.schema().contains(name)) unknown += (unknown.empty() ? "" : ", ") + name;
  if (!unknown.empty()) throw SchemaError("unknown attributes: " + unknown);
  return raw.project(keep);
}

struct PrepConfig {
  std::optional<std::vector<std::string>> keep;  // all columns when unset
  std::string value_column;
  std::optional<std::string> currency_column;  // pesos when unset
  std::optional<std::string> year_column;      // required with a price index
  std::string area_column;
  std::optional<std::string> area_unit_column;  // m2 when unset
  std::string declared_column;
  std::string reference_column;

  std::string area_output = "superficiem2";
  std::string value_output = "valor_patrim";
  std::string class_output = "val_decl";

  FxTable fx;
  std::optional<CpiTable> cpi;
  double tolerance = 0.10;
  std::string peso_code = "ARS";
};

struct PrepWarning {
  RowId row_id = 0;
  std::string field;
  std::string message;
};

struct PrepResult {
  Dataset data;
  std::vector<PrepWarning> warnings;
  std::size_t rows_touched = 0;  // rows whose value or area changed
};

/// Columns a configuration reads; all must exist before anything runs.
inline std::vector<std::string> referenced_columns(const PrepConfig& cfg) {
  std::vector<std::string> cols{cfg.value_column, cfg.area_column, cfg.declared_column, cfg.reference_column};
  for (const auto* opt : {&cfg.currency_column, &cfg.year_column, &cfg.area_unit_column})
    if (*opt) cols.push_back(**opt);
  if (cfg.keep) cols.insert(cols.end(), cfg.keep->begin(), cfg.keep->end());
  return cols;
}

/// Attribute selection, then constant-peso valuation, square-metre area and
/// declared-value class for every row. Rows are never dropped: a value that
/// cannot be derived becomes Missing and is logged.
inline PrepResult prepare(const Dataset& raw, const PrepConfig& cfg) {
  std::string unknown;
  std::set<std::string> seen;
  for (const auto& c : referenced_columns(cfg))
    if (!raw.schema().contains(c) && seen.insert(c).second) unknown += (unknown.empty() ? "" : ", ") + c;
  if (!unknown.empty()) throw SchemaError("configuration references missing columns: " + unknown);
  if (cfg.cpi && !cfg.year_column) throw ArgumentError("a price index needs a year column");
  if (!(cfg.tolerance > 0 && cfg.tolerance < 1)) throw ArgumentError("tolerance must lie in (0, 1)");
  for (const auto* name : {&cfg.value_column, &cfg.area_column, &cfg.declared_column, &cfg.reference_column})
    if (raw.schema()[raw.index_of(*name)].kind != AttributeKind::Numeric)
      throw SchemaError("column '" + *name + "' must be numeric");

  std::vector<std::string> keep;
  if (cfg.keep) keep = *cfg.keep;
  else
    for (const auto& a : raw.schema().attributes()) keep.push_back(a.name);
  Dataset out = select_attributes(raw, keep);

  PrepResult res;
  const std::size_t n = raw.num_rows();
  auto number_at = [&](std::size_t r, const std::string& col) -> std::optional<double> {
    const auto& v = raw.at(r, raw.index_of(col));
    if (v.is_number()) return v.as_number();
    return std::nullopt;
  };
  auto text_at = [&](std::size_t r, const std::string& col) -> std::optional<std::string> {
    const auto& v = raw.at(r, raw.index_of(col));
    if (v.is_missing()) return std::nullopt;
    return v.to_text();
  };
  auto warn = [&](std::size_t r, const std::string& field, std::string msg) {
    res.warnings.push_back({raw.row_id(r), field, std::move(msg)});
  };

  std::vector<Value> value_col(n), area_col(n), class_col(n);
  std::vector<char> touched(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    // valor_patrim
    if (const auto amount = number_at(r, cfg.value_column)) {
      const auto currency = cfg.currency_column ? text_at(r, *cfg.currency_column) : cfg.peso_code;
      std::optional<int> year;
      if (cfg.year_column)
        if (const auto y = number_at(r, *cfg.year_column); y && *y == std::floor(*y)) year = static_cast<int>(*y);
      const bool needs_year = cfg.cpi || currency != cfg.peso_code;
      if (!currency) {
        warn(r, cfg.value_output, "currency missing; value not convertible");
      } else if (needs_year && !year) {
        warn(r, cfg.value_output, "year missing or invalid; value not convertible");
      } else {
        try {
          double v = *amount;
          if (cfg.cpi) {
            v = convert_valuation(*amount, *currency, *year, cfg.fx, *cfg.cpi, cfg.peso_code);
          } else if (*currency != cfg.peso_code) {
            const auto rate = cfg.fx.find(*currency, *year);
            if (!rate) throw DataError("no exchange rate for " + *currency + " in " + std::to_string(*year));
            v = *amount * *rate;
          }
          value_col[r] = Value(v);
          if (v != *amount) touched[r] = 1;
        } catch (const DataError& e) {
          warn(r, cfg.value_output, e.what());
        }
      }
    }

    // superficiem2
    if (const auto area = number_at(r, cfg.area_column)) {
      try {
        AreaUnit unit = AreaUnit::SquareMetre;
        if (cfg.area_unit_column) {
          const auto u = text_at(r, *cfg.area_unit_column);
          if (!u) throw DataError("area unit missing");
          unit = parse_area_unit(*u);
        }
        const double m2 = homogenize_area(*area, unit);
        area_col[r] = Value(m2);
        if (m2 != *area) touched[r] = 1;
      } catch (const DataError& e) {
        warn(r, cfg.area_output, e.what());
      }
    }

    // val_decl
    const auto cls = classify_declared_value(number_at(r, cfg.declared_column), number_at(r, cfg.reference_column),
                                             cfg.tolerance);
    class_col[r] = Value(std::string(to_label(cls.value)));
    if (cls.warning) warn(r, cfg.class_output, *cls.warning);
  }

  out = out.with_column({cfg.area_output, AttributeKind::Numeric}, std::move(area_col));
  out = out.with_column({cfg.value_output, AttributeKind::Numeric}, std::move(value_col));
  out = out.with_column({cfg.class_output, AttributeKind::Nominal}, std::move(class_col));
  res.rows_touched = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), 1));
  res.data = std::move(out);
  return res;
}

}  // namespace fieldscan
