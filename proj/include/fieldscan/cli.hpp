#pragma once

// Command-line front end. Everything lives here so tests can drive commands
// in-process; tools/fieldscan.cpp only forwards argv to run().

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldscan/fieldscan.hpp"

namespace fieldscan::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolName = "fieldscan";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kQualityGate = 4 };

/// Bad or inconsistent configuration (exit 2).
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Quality gate not met (exit 4).
class GateFailure : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Config reading helpers.

namespace detail {

inline std::string where(std::string_view section, std::string_view key) {
  return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

inline void only_keys(const Json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + where(section, key) + "'");
  }
}

inline const Json* find(const Json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

inline double number(const Json& obj, std::string_view section, std::string_view key, double fallback) {
  const auto* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError("'" + where(section, key) + "' must be a number");
  return v->get<double>();
}

inline std::uint64_t count(const Json& obj, std::string_view section, std::string_view key, std::uint64_t fallback) {
  const auto* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
    throw ConfigError("'" + where(section, key) + "' must be a non-negative integer");
  return v->get<std::uint64_t>();
}

inline bool boolean(const Json& obj, std::string_view section, std::string_view key, bool fallback) {
  const auto* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError("'" + where(section, key) + "' must be true or false");
  return v->get<bool>();
}

inline std::optional<std::string> text(const Json& obj, std::string_view section, std::string_view key) {
  const auto* v = find(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_string() || v->get<std::string>().empty())
    throw ConfigError("'" + where(section, key) + "' must be a nonempty string");
  return v->get<std::string>();
}

inline std::string required_text(const Json& obj, std::string_view section, std::string_view key) {
  auto v = text(obj, section, key);
  if (!v) throw ConfigError("'" + where(section, key) + "' is required");
  return *v;
}

inline std::vector<std::string> text_list(const Json& v, std::string_view name) {
  if (!v.is_array()) throw ConfigError("'" + std::string(name) + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw ConfigError("'" + std::string(name) + "' must be a list of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

inline Json value_json(const Value& v) {
  if (v.is_number()) return std::isfinite(v.as_number()) ? Json(v.as_number()) : Json(nullptr);
  if (v.is_label()) return v.as_label();
  return nullptr;
}

inline Json flags_json(const std::vector<bool>& flags) {
  Json a = Json::array();
  for (bool f : flags) a.push_back(f);
  return a;
}

inline std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Modification time of `p` as ISO-8601 UTC; reports are stamped with their
/// input's age so identical inputs give identical bytes.
inline std::string file_timestamp(const fs::path& p) {
  const auto sys = std::chrono::file_clock::to_sys(fs::last_write_time(p));
  return iso_utc(std::chrono::system_clock::to_time_t(std::chrono::time_point_cast<std::chrono::seconds>(sys)));
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Output files staged next to their destination and renamed together once
/// the command has succeeded; nothing is left behind on failure.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    for (const auto& [tmp, final_path] : staged_) {
      (void)final_path;
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

  void add(const std::string& name, const std::string& content) {
    staged_text_.emplace_back(name, content);
  }

  std::vector<fs::path> commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    for (const auto& [name, content] : staged_text_) {
      const auto final_path = dir_ / name;
      const auto tmp = dir_ / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      staged_.emplace_back(tmp, final_path);
      out << content;
      out.close();
      if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    }
    std::vector<fs::path> written;
    for (const auto& [tmp, final_path] : staged_) {
      fs::rename(tmp, final_path);
      written.push_back(final_path);
    }
    staged_.clear();
    return written;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> staged_text_;
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

// ---------------------------------------------------------------------------
// Configuration.

struct Options {
  std::string command;
  fs::path config_path;
  std::optional<fs::path> out_dir;
  std::optional<std::uint64_t> seed;
};

/// Parsed configuration file with paths resolved against its directory.
struct Config {
  Json raw;
  fs::path base_dir;
  std::optional<fs::path> dataset;
  fs::path output_dir;
  std::uint64_t seed = 0;
  CsvOptions csv;
  Json csv_echo = Json::object();

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal();
  }

  fs::path require_dataset() const {
    if (!dataset) throw ConfigError("'dataset' is required for this command");
    return *dataset;
  }

  const Json& section(std::string_view name) const {
    static const Json empty = Json::object();
    const auto* s = detail::find(raw, name);
    if (!s) return empty;
    if (!s->is_object()) throw ConfigError("'" + std::string(name) + "' must be an object");
    return *s;
  }
};

inline AttributeKind parse_kind(const std::string& s, std::string_view where) {
  if (s == "numeric") return AttributeKind::Numeric;
  if (s == "nominal") return AttributeKind::Nominal;
  throw ConfigError("'" + std::string(where) + "' must be \"numeric\" or \"nominal\"");
}

inline Config load_config(const Options& opt) {
  if (!fs::exists(opt.config_path)) throw ConfigError("config file '" + opt.config_path.string() + "' not found");
  Config cfg;
  try {
    cfg.raw = Json::parse(detail::read_file(opt.config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  detail::only_keys(cfg.raw, "", {"dataset", "output_dir", "seed", "csv", "prepare", "detect", "proc1", "synth", "eval"});
  cfg.base_dir = fs::absolute(opt.config_path).parent_path();
  if (auto d = detail::text(cfg.raw, "", "dataset")) cfg.dataset = cfg.resolve(*d);
  cfg.output_dir = opt.out_dir ? fs::absolute(*opt.out_dir).lexically_normal()
                               : cfg.resolve(detail::text(cfg.raw, "", "output_dir").value_or("out"));
  cfg.seed = opt.seed ? *opt.seed : detail::count(cfg.raw, "", "seed", 0);

  const auto& csv = cfg.section("csv");
  detail::only_keys(csv, "csv", {"missing", "kinds"});
  if (const auto* m = detail::find(csv, "missing")) cfg.csv.missing_sentinels = detail::text_list(*m, "csv.missing");
  if (const auto* k = detail::find(csv, "kinds")) {
    if (!k->is_object()) throw ConfigError("'csv.kinds' must map column names to kinds");
    for (const auto& [name, kind] : k->items()) {
      if (!kind.is_string()) throw ConfigError("'csv.kinds." + name + "' must be a string");
      cfg.csv.kind_hints[name] = parse_kind(kind.get<std::string>(), "csv.kinds." + name);
    }
  }
  Json kinds = Json::object();
  for (const auto& [name, kind] : cfg.csv.kind_hints) kinds[name] = std::string(to_string(kind));
  cfg.csv_echo = {{"missing", cfg.csv.missing_sentinels}, {"kinds", kinds}};
  return cfg;
}

inline Dataset load_dataset(const Config& cfg) {
  const auto path = cfg.require_dataset();
  if (!fs::exists(path)) throw ConfigError("dataset '" + path.string() + "' not found");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset '" + path.string() + "'");
  return load_csv(in, cfg.csv);
}

/// Detector, vote and refinement parameters from the "detect" section.
inline ProcedureConfig detect_config(const Config& cfg) {
  using namespace detail;
  const auto& d = cfg.section("detect");
  only_keys(d, "detect", {"lof", "dbscan", "vote", "discretize_bins", "c45", "n_bins", "kmeans_max_iter", "kmeans_n_init"});
  ProcedureConfig p;
  p.seed = cfg.seed;
  if (const auto* lof = find(d, "lof")) {
    only_keys(*lof, "detect.lof", {"k", "threshold"});
    p.lof.k = count(*lof, "detect.lof", "k", p.lof.k);
    p.lof.threshold = number(*lof, "detect.lof", "threshold", p.lof.threshold);
  }
  if (const auto* db = find(d, "dbscan")) {
    only_keys(*db, "detect.dbscan", {"eps", "min_pts"});
    p.dbscan.eps = number(*db, "detect.dbscan", "eps", p.dbscan.eps);
    p.dbscan.min_pts = count(*db, "detect.dbscan", "min_pts", p.dbscan.min_pts);
  }
  if (const auto* v = find(d, "vote")) {
    only_keys(*v, "detect.vote", {"phase1_rule", "classifier_quorum"});
    if (auto rule = text(*v, "detect.vote", "phase1_rule")) {
      if (*rule == "union") p.vote.phase1_rule = Phase1Rule::Union;
      else if (*rule == "intersection") p.vote.phase1_rule = Phase1Rule::Intersection;
      else throw ConfigError("'detect.vote.phase1_rule' must be \"union\" or \"intersection\"");
    }
    p.vote.classifier_quorum = count(*v, "detect.vote", "classifier_quorum", p.vote.classifier_quorum);
  }
  if (const auto* c = find(d, "c45")) {
    only_keys(*c, "detect.c45", {"min_leaf", "min_gain", "confidence", "prune"});
    p.refine.c45.min_leaf = count(*c, "detect.c45", "min_leaf", p.refine.c45.min_leaf);
    p.refine.c45.min_gain = number(*c, "detect.c45", "min_gain", p.refine.c45.min_gain);
    p.refine.c45.confidence = number(*c, "detect.c45", "confidence", p.refine.c45.confidence);
    p.refine.c45.prune = boolean(*c, "detect.c45", "prune", p.refine.c45.prune);
  }
  p.refine.discretize_bins = count(d, "detect", "discretize_bins", p.refine.discretize_bins);
  p.n_bins = count(d, "detect", "n_bins", p.n_bins);
  p.kmeans_max_iter = count(d, "detect", "kmeans_max_iter", p.kmeans_max_iter);
  p.kmeans_n_init = count(d, "detect", "kmeans_n_init", p.kmeans_n_init);

  if (p.lof.k < 1) throw ConfigError("'detect.lof.k' must be at least 1");
  if (!(p.lof.threshold > 0)) throw ConfigError("'detect.lof.threshold' must be positive");
  if (!(p.dbscan.eps > 0)) throw ConfigError("'detect.dbscan.eps' must be positive");
  if (p.dbscan.min_pts < 1) throw ConfigError("'detect.dbscan.min_pts' must be at least 1");
  if (p.vote.classifier_quorum < 1 || p.vote.classifier_quorum > 3)
    throw ConfigError("'detect.vote.classifier_quorum' must lie in [1, 3]");
  if (p.refine.c45.min_leaf < 1) throw ConfigError("'detect.c45.min_leaf' must be at least 1");
  if (!(p.refine.c45.min_gain >= 0)) throw ConfigError("'detect.c45.min_gain' must be non-negative");
  if (!(p.refine.c45.confidence > 0 && p.refine.c45.confidence < 1))
    throw ConfigError("'detect.c45.confidence' must lie in (0, 1)");
  if (p.refine.discretize_bins < 2) throw ConfigError("'detect.discretize_bins' must be at least 2");
  if (p.n_bins < 1) throw ConfigError("'detect.n_bins' must be at least 1");
  if (p.kmeans_max_iter < 1) throw ConfigError("'detect.kmeans_max_iter' must be at least 1");
  if (p.kmeans_n_init < 1) throw ConfigError("'detect.kmeans_n_init' must be at least 1");
  return p;
}

inline Json detect_echo(const ProcedureConfig& p) {
  return {{"lof", {{"k", p.lof.k}, {"threshold", p.lof.threshold}}},
          {"dbscan", {{"eps", p.dbscan.eps}, {"min_pts", p.dbscan.min_pts}}},
          {"vote",
           {{"phase1_rule", p.vote.phase1_rule == Phase1Rule::Union ? "union" : "intersection"},
            {"classifier_quorum", p.vote.classifier_quorum}}},
          {"discretize_bins", p.refine.discretize_bins},
          {"c45",
           {{"min_leaf", p.refine.c45.min_leaf},
            {"min_gain", p.refine.c45.min_gain},
            {"confidence", p.refine.c45.confidence},
            {"prune", p.refine.c45.prune}}},
          {"n_bins", p.n_bins},
          {"kmeans_max_iter", p.kmeans_max_iter},
          {"kmeans_n_init", p.kmeans_n_init}};
}

inline Json envelope(std::string_view command, const std::string& timestamp, Json config, Json payload,
                     const std::vector<std::string>& warnings) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"timestamp", timestamp},
          {"config", std::move(config)},
          {"payload", std::move(payload)},
          {"warnings", warnings}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// `row_id,<columns...>` export of the rows whose id is in `ids`.
inline std::string flagged_csv(const Dataset& ds, const std::vector<RowId>& ids) {
  const std::set<RowId> wanted(ids.begin(), ids.end());
  std::vector<std::size_t> pos;
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    if (wanted.count(ds.row_id(r))) pos.push_back(r);
  return to_csv(ds.select_rows(pos), true);
}

// ---------------------------------------------------------------------------
// Commands. Each returns the files it wrote.

inline std::vector<fs::path> cmd_prepare(const Config& cfg, std::ostream& /*out*/) {
  using namespace detail;
  const auto& s = cfg.section("prepare");
  only_keys(s, "prepare", {"keep", "columns", "outputs", "fx_table", "cpi_table", "cpi_base_year", "tolerance", "peso_code"});
  PrepConfig p;
  if (const auto* k = find(s, "keep")) p.keep = text_list(*k, "prepare.keep");
  const auto* cols = find(s, "columns");
  if (!cols) throw ConfigError("'prepare.columns' is required");
  only_keys(*cols, "prepare.columns", {"value", "currency", "year", "area", "area_unit", "declared", "reference"});
  p.value_column = required_text(*cols, "prepare.columns", "value");
  p.currency_column = text(*cols, "prepare.columns", "currency");
  p.year_column = text(*cols, "prepare.columns", "year");
  p.area_column = required_text(*cols, "prepare.columns", "area");
  p.area_unit_column = text(*cols, "prepare.columns", "area_unit");
  p.declared_column = required_text(*cols, "prepare.columns", "declared");
  p.reference_column = required_text(*cols, "prepare.columns", "reference");
  if (const auto* o = find(s, "outputs")) {
    only_keys(*o, "prepare.outputs", {"area", "value", "class"});
    p.area_output = text(*o, "prepare.outputs", "area").value_or(p.area_output);
    p.value_output = text(*o, "prepare.outputs", "value").value_or(p.value_output);
    p.class_output = text(*o, "prepare.outputs", "class").value_or(p.class_output);
  }
  p.tolerance = number(s, "prepare", "tolerance", p.tolerance);
  p.peso_code = text(s, "prepare", "peso_code").value_or(p.peso_code);

  std::optional<fs::path> fx_path, cpi_path;
  if (auto f = text(s, "prepare", "fx_table")) fx_path = cfg.resolve(*f);
  if (auto c = text(s, "prepare", "cpi_table")) cpi_path = cfg.resolve(*c);
  const auto base_year = find(s, "cpi_base_year");
  if (cpi_path && !base_year) throw ConfigError("'prepare.cpi_base_year' is required with a price index");
  for (const auto& path : {fx_path, cpi_path})
    if (path && !fs::exists(*path)) throw ConfigError("table '" + path->string() + "' not found");
  const auto dataset_path = cfg.require_dataset();
  if (!fs::exists(dataset_path)) throw ConfigError("dataset '" + dataset_path.string() + "' not found");

  if (fx_path) p.fx = FxTable::from_csv(read_file(*fx_path));
  if (cpi_path) {
    if (!base_year->is_number_integer()) throw ConfigError("'prepare.cpi_base_year' must be an integer");
    p.cpi = CpiTable::from_csv(read_file(*cpi_path), base_year->get<int>());
  }

  const auto raw = load_dataset(cfg);
  const auto res = prepare(raw, p);

  Json columns = {{"value", p.value_column}, {"area", p.area_column}, {"declared", p.declared_column},
                  {"reference", p.reference_column}};
  if (p.currency_column) columns["currency"] = *p.currency_column;
  if (p.year_column) columns["year"] = *p.year_column;
  if (p.area_unit_column) columns["area_unit"] = *p.area_unit_column;
  Json prep_echo = {{"columns", columns},
                    {"outputs", {{"area", p.area_output}, {"value", p.value_output}, {"class", p.class_output}}},
                    {"tolerance", p.tolerance},
                    {"peso_code", p.peso_code}};
  if (p.keep) prep_echo["keep"] = *p.keep;
  if (fx_path) prep_echo["fx_table"] = fx_path->string();
  if (cpi_path) {
    prep_echo["cpi_table"] = cpi_path->string();
    prep_echo["cpi_base_year"] = p.cpi->base_year();
  }
  const Json config = {{"dataset", dataset_path.string()}, {"csv", cfg.csv_echo}, {"prepare", prep_echo}};

  std::ostringstream log;
  for (const auto& w : res.warnings)
    log << Json{{"event", "warning"}, {"row_id", w.row_id}, {"field", w.field}, {"message", w.message}}.dump() << "\n";
  log << Json{{"event", "summary"},
              {"tool", kToolName},
              {"version", kToolVersion},
              {"timestamp", file_timestamp(dataset_path)},
              {"config", config},
              {"rows", res.data.num_rows()},
              {"attributes", res.data.num_attributes()},
              {"rows_touched", res.rows_touched},
              {"warnings", res.warnings.size()}}
             .dump()
      << "\n";

  OutputSet files(cfg.output_dir);
  files.add("prepared.csv", to_csv(res.data));
  files.add("prepare_log.jsonl", log.str());
  return files.commit();
}

inline Json bin_report_json(const BinReport& b) {
  Json profile = nullptr;
  if (b.profile.input) {
    profile = {{"input_statistic", b.profile.input_is_mean ? "mean" : "mode"},
               {"input", detail::value_json(*b.profile.input)},
               {"target_mode", b.profile.target_mode ? detail::value_json(*b.profile.target_mode) : Json(nullptr)}};
  }
  return {{"bin", b.input_attribute + "(" + b.target_attribute + ")"},
          {"input_attribute", b.input_attribute},
          {"target_attribute", b.target_attribute},
          {"rows_screened", b.rows_screened},
          {"skipped", b.skipped},
          {"outlier_count", b.outlier_count},
          {"outlier_row_ids", b.outlier_row_ids},
          {"profile", profile}};
}

inline std::vector<fs::path> cmd_proc1(const Config& cfg, std::ostream& /*out*/) {
  using namespace detail;
  const auto& s = cfg.section("proc1");
  only_keys(s, "proc1", {"target", "export_flagged"});
  const auto target = required_text(s, "proc1", "target");
  const bool export_flagged = boolean(s, "proc1", "export_flagged", false);
  const auto params = detect_config(cfg);
  const auto ds = load_dataset(cfg);
  if (!ds.schema().contains(target)) throw ConfigError("target '" + target + "' is not a column of the dataset");
  if (ds.schema()[ds.index_of(target)].kind != AttributeKind::Nominal)
    throw ConfigError("target '" + target + "' must be nominal");

  const auto res = procedure_one(ds, target, params);
  Json bins = Json::array();
  std::vector<RowId> any;
  for (const auto& b : res.bins) {
    bins.push_back(bin_report_json(b));
    any.insert(any.end(), b.outlier_row_ids.begin(), b.outlier_row_ids.end());
  }
  Json config = {{"dataset", cfg.require_dataset().string()},
                 {"seed", cfg.seed},
                 {"csv", cfg.csv_echo},
                 {"detect", detect_echo(params)},
                 {"proc1", {{"target", target}, {"export_flagged", export_flagged}}}};
  const auto doc = envelope("proc1", file_timestamp(cfg.require_dataset()), std::move(config),
                            bins, res.warnings);

  OutputSet files(cfg.output_dir);
  files.add("proc1_report.json", dump(doc));
  if (export_flagged) files.add("proc1_flagged.csv", flagged_csv(ds, any));
  return files.commit();
}

inline Json rule_json(const Rule& rule) {
  Json conds = Json::array();
  for (const auto& c : rule.antecedent) {
    Json j = {{"attribute", c.attribute}};
    if (c.equals) j["equals"] = *c.equals;
    if (c.above) j["above"] = *c.above;
    if (c.at_most) j["at_most"] = *c.at_most;
    conds.push_back(std::move(j));
  }
  return {{"antecedent", conds},
          {"consequent", rule.consequent},
          {"coverage", rule.coverage},
          {"accuracy", rule.accuracy},
          {"text", rule.to_string()}};
}

inline Json rules_json(const std::vector<Rule>& rules) {
  Json a = Json::array();
  for (const auto& r : rules) a.push_back(rule_json(r));
  return a;
}

inline Json outlier_report_json(const OutlierReport& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.n_rows; ++i) {
    const auto vote = [&](const std::vector<bool>& v) { return r.refinement_skipped ? Json(nullptr) : Json(bool(v[i])); };
    rows.push_back({{"row_id", r.row_ids[i]},
                    {"lof_score", std::isfinite(r.lof_scores[i]) ? Json(r.lof_scores[i]) : Json(nullptr)},
                    {"lof_flag", bool(r.lof_flags[i])},
                    {"dbscan_label", r.dbscan_labels[i]},
                    {"dbscan_noise", r.dbscan_labels[i] == kNoise},
                    {"provisional", bool(r.provisional[i])},
                    {"c45_vote", vote(r.c45_votes)},
                    {"prism_vote", vote(r.prism_votes)},
                    {"nb_vote", vote(r.nb_votes)},
                    {"flagged", bool(r.final_flags[i])}});
  }
  return {{"n_rows", r.n_rows},
          {"flagged_count", r.flagged_row_ids.size()},
          {"flagged_fraction", r.flagged_fraction},
          {"flagged_row_ids", r.flagged_row_ids},
          {"refinement_skipped", r.refinement_skipped},
          {"outlier_rules", {{"c45", rules_json(r.c45_rules)}, {"prism", rules_json(r.prism_rules)}}},
          {"notes", r.notes},
          {"rows", rows}};
}

inline std::vector<fs::path> cmd_proc2(const Config& cfg, std::ostream& /*out*/) {
  const auto params = detect_config(cfg);
  const auto ds = load_dataset(cfg);
  if (ds.num_rows() <= params.lof.k)
    throw ConfigError("'detect.lof.k' (" + std::to_string(params.lof.k) + ") must be below the row count (" +
                      std::to_string(ds.num_rows()) + ")");
  const auto res = procedure_two(ds, params);
  Json ranking = Json::array();
  for (const auto& e : res.ranking.entries) ranking.push_back({{"attribute", e.attribute}, {"distance", e.distance}});
  Json config = {{"dataset", cfg.require_dataset().string()},
                 {"seed", cfg.seed},
                 {"csv", cfg.csv_echo},
                 {"detect", detect_echo(params)}};
  const auto doc = envelope("proc2", detail::file_timestamp(cfg.require_dataset()), std::move(config),
                            {{"outlier_report", outlier_report_json(res.report)}, {"attribute_ranking", ranking}},
                            res.report.notes);
  OutputSet files(cfg.output_dir);
  files.add("proc2_report.json", dump(doc));
  files.add("proc2_flagged.csv", flagged_csv(ds, res.report.flagged_row_ids));
  return files.commit();
}

inline ColumnSpec column_spec(const Json& c, std::string_view at) {
  using namespace detail;
  const auto name = required_text(c, at, "name");
  const auto kind = parse_kind(required_text(c, at, "kind"), std::string(at) + ".kind");
  if (kind == AttributeKind::Numeric) {
    only_keys(c, at, {"name", "kind", "mean", "std", "decimals"});
    const auto decimals = find(c, "decimals");
    if (decimals && !decimals->is_number_integer()) throw ConfigError("'" + where(at, "decimals") + "' must be an integer");
    return ColumnSpec::numeric(name, number(c, at, "mean", 0), number(c, at, "std", 1),
                               decimals ? decimals->get<int>() : -1);
  }
  only_keys(c, at, {"name", "kind", "distribution"});
  const auto* d = find(c, "distribution");
  if (!d || !d->is_object() || d->empty())
    throw ConfigError("'" + where(at, "distribution") + "' must map labels to probabilities");
  std::vector<std::pair<std::string, double>> dist;
  for (const auto& [label, p] : d->items()) {
    if (!p.is_number()) throw ConfigError("'" + where(at, "distribution") + "' probabilities must be numbers");
    dist.emplace_back(label, p.get<double>());
  }
  return ColumnSpec::nominal(name, std::move(dist));
}

inline Json column_echo(const ColumnSpec& c) {
  if (c.kind == AttributeKind::Numeric) {
    Json j = {{"name", c.name}, {"kind", "numeric"}, {"mean", c.mean}, {"std", c.std_dev}};
    if (c.decimals >= 0) j["decimals"] = c.decimals;
    return j;
  }
  Json d = Json::object();
  for (const auto& [label, p] : c.distribution) d[label] = p;
  return {{"name", c.name}, {"kind", "nominal"}, {"distribution", d}};
}

inline AnomalyKind parse_anomaly(const std::string& s) {
  if (s == "point_outlier") return AnomalyKind::PointOutlier;
  if (s == "label_noise") return AnomalyKind::LabelNoise;
  if (s == "missing_burst") return AnomalyKind::MissingBurst;
  throw ConfigError("unknown anomaly kind '" + s + "'");
}

inline std::string_view sign_name(OutlierSign s) {
  switch (s) {
    case OutlierSign::Above: return "above";
    case OutlierSign::Below: return "below";
    case OutlierSign::Both: return "both";
  }
  return "both";
}

inline std::vector<fs::path> cmd_synth(const Config& cfg, std::ostream& /*out*/) {
  using namespace detail;
  const auto& s = cfg.section("synth");
  only_keys(s, "synth", {"n_rows", "preset", "rare_label_probability", "columns", "target", "injection"});
  const auto n = count(s, "synth", "n_rows", 0);
  if (n < 1) throw ConfigError("'synth.n_rows' must be at least 1");

  SynthSpec spec;
  const auto preset = text(s, "synth", "preset");
  if (preset) {
    if (*preset != "affidavit_like") throw ConfigError("unknown preset '" + *preset + "'");
    if (find(s, "columns")) throw ConfigError("'synth.columns' and 'synth.preset' are exclusive");
    const double rare = number(s, "synth", "rare_label_probability", 0.005);
    if (!(rare > 0 && rare < 0.5)) throw ConfigError("'synth.rare_label_probability' must lie in (0, 0.5)");
    spec = affidavit_like_spec(n, cfg.seed, rare);
  } else {
    const auto* cols = find(s, "columns");
    if (!cols || !cols->is_array() || cols->empty()) throw ConfigError("'synth.columns' or 'synth.preset' is required");
    spec.n_rows = n;
    spec.seed = cfg.seed;
    for (std::size_t i = 0; i < cols->size(); ++i)
      spec.columns.push_back(column_spec((*cols)[i], "synth.columns[" + std::to_string(i) + "]"));
  }
  if (const auto* t = find(s, "target")) spec.target = column_spec(*t, "synth.target");
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  auto data = generate(spec);
  std::vector<bool> truth(data.num_rows(), false);
  Json injection_echo = nullptr;
  if (const auto* inj = find(s, "injection")) {
    only_keys(*inj, "synth.injection", {"rate", "kinds", "target_attrs", "magnitude", "sign", "seed"});
    InjectionSpec is;
    is.seed = count(*inj, "synth.injection", "seed", cfg.seed + 1);
    is.rate = number(*inj, "synth.injection", "rate", is.rate);
    is.magnitude = number(*inj, "synth.injection", "magnitude", is.magnitude);
    if (const auto* k = find(*inj, "kinds")) {
      is.kinds.clear();
      for (const auto& name : text_list(*k, "synth.injection.kinds")) is.kinds.push_back(parse_anomaly(name));
    }
    if (const auto* t = find(*inj, "target_attrs")) {
      is.target_attrs = text_list(*t, "synth.injection.target_attrs");
    } else {
      for (const auto& a : data.schema().attributes())
        if (a.kind == AttributeKind::Numeric) is.target_attrs.push_back(a.name);
    }
    for (const auto& a : is.target_attrs)
      if (!data.schema().contains(a)) throw ConfigError("injection target '" + a + "' is not a generated column");
    if (auto sign = text(*inj, "synth.injection", "sign")) {
      if (*sign == "both") is.sign = OutlierSign::Both;
      else if (*sign == "above") is.sign = OutlierSign::Above;
      else if (*sign == "below") is.sign = OutlierSign::Below;
      else throw ConfigError("'synth.injection.sign' must be \"both\", \"above\" or \"below\"");
    }
    Injection out;
    try {
      out = inject(data, is);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    Json kinds = Json::array();
    for (auto k : is.kinds) kinds.push_back(to_string(k));
    injection_echo = {{"rate", is.rate},
                      {"kinds", kinds},
                      {"target_attrs", is.target_attrs},
                      {"magnitude", is.magnitude},
                      {"sign", sign_name(is.sign)},
                      {"seed", is.seed}};
    data = std::move(out.data);
    truth = std::move(out.truth);
  }

  std::ostringstream t;
  t << "row_id,is_anomaly\n";
  for (std::size_t r = 0; r < data.num_rows(); ++r) t << data.row_id(r) << ',' << (truth[r] ? 1 : 0) << "\n";
  Json cols = Json::array();
  for (const auto& c : spec.columns) cols.push_back(column_echo(c));
  Json echo = {{"n_rows", n}, {"columns", cols}};
  if (spec.target) echo["target"] = column_echo(*spec.target);
  echo["injection"] = injection_echo;

  OutputSet files(cfg.output_dir);
  files.add("synth.csv", to_csv(data));
  files.add("synth_truth.csv", t.str());
  files.add("synth_spec.json", dump({{"seed", cfg.seed}, {"synth", echo}}));
  return files.commit();
}

/// Truth sidecar: `row_id,is_anomaly` with 0/1 flags.
inline std::map<RowId, bool> load_truth(const fs::path& p) {
  CsvOptions opts;
  opts.kind_hints = {{"row_id", AttributeKind::Numeric}, {"is_anomaly", AttributeKind::Numeric}};
  std::ifstream in(p, std::ios::binary);
  Dataset ds;
  try {
    ds = load_csv(in, opts);
  } catch (const SchemaError& e) {
    throw DataError(std::string("truth file: ") + e.what());
  }
  for (const char* col : {"row_id", "is_anomaly"})
    if (!ds.schema().contains(col)) throw DataError("truth file has no '" + std::string(col) + "' column");
  std::map<RowId, bool> out;
  const auto ci = ds.index_of("row_id");
  const auto cf = ds.index_of("is_anomaly");
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    const auto& id = ds.at(r, ci);
    const auto& f = ds.at(r, cf);
    if (!id.is_number() || id.as_number() != std::floor(id.as_number()))
      throw DataError("truth row " + std::to_string(r + 1) + " has no integral row_id");
    if (!f.is_number() || (f.as_number() != 0 && f.as_number() != 1))
      throw DataError("truth row " + std::to_string(r + 1) + ": is_anomaly must be 0 or 1");
    if (!out.emplace(static_cast<RowId>(id.as_number()), f.as_number() == 1).second)
      throw DataError("truth lists row_id " + format_number(id.as_number()) + " twice");
  }
  return out;
}

inline std::vector<fs::path> cmd_eval(const Config& cfg, std::ostream& out) {
  using namespace detail;
  const auto& s = cfg.section("eval");
  only_keys(s, "eval", {"report", "truth", "recall_floor"});
  const auto report_path = cfg.resolve(required_text(s, "eval", "report"));
  const auto truth_path = cfg.resolve(required_text(s, "eval", "truth"));
  const double floor = number(s, "eval", "recall_floor", 0.0);
  if (!(floor >= 0 && floor <= 1)) throw ConfigError("'eval.recall_floor' must lie in [0, 1]");
  for (const auto& p : {report_path, truth_path})
    if (!fs::exists(p)) throw ConfigError("'" + p.string() + "' not found");

  Json report;
  try {
    report = Json::parse(read_file(report_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("report is not valid JSON: " + std::string(e.what()));
  }
  const Json* rows = nullptr;
  if (report.contains("payload") && report["payload"].contains("outlier_report"))
    rows = &report["payload"]["outlier_report"]["rows"];
  if (!rows || !rows->is_array()) throw DataError("report has no per-row outlier flags (expected a proc2 report)");

  const auto truth = load_truth(truth_path);
  std::vector<bool> flags, gold;
  std::set<RowId> seen;
  for (const auto& row : *rows) {
    const auto id = row.at("row_id").get<RowId>();
    auto it = truth.find(id);
    if (it == truth.end()) throw DataError("row_id " + std::to_string(id) + " is missing from the truth file");
    seen.insert(id);
    flags.push_back(row.at("flagged").get<bool>());
    gold.push_back(it->second);
  }
  if (seen.size() != truth.size() || seen.size() != rows->size())
    throw DataError("report and truth cover different row_ids (" + std::to_string(rows->size()) + " report rows, " +
                    std::to_string(truth.size()) + " truth rows)");

  const auto e = evaluate(flags, gold);
  const Json payload = {{"precision", e.precision},
                        {"recall", e.recall},
                        {"f1", e.f1},
                        {"confusion", {{"tp", e.tp}, {"fp", e.fp}, {"tn", e.tn}, {"fn", e.fn}}},
                        {"recall_floor", floor},
                        {"passed", e.recall >= floor}};
  Json config = {{"eval", {{"report", report_path.string()}, {"truth", truth_path.string()}, {"recall_floor", floor}}}};
  const auto doc = envelope("eval", file_timestamp(report_path), std::move(config), payload, {});
  out << dump(payload);
  if (e.recall < floor)
    throw GateFailure("recall " + format_number(e.recall) + " is below the floor " + format_number(floor));
  OutputSet files(cfg.output_dir);
  files.add("eval.json", dump(doc));
  return files.commit();
}

// ---------------------------------------------------------------------------
// Entry point.

inline int execute(const Options& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = load_config(opt);
    if (opt.command == "prepare") cmd_prepare(cfg, out);
    else if (opt.command == "proc1") cmd_proc1(cfg, out);
    else if (opt.command == "proc2") cmd_proc2(cfg, out);
    else if (opt.command == "synth") cmd_synth(cfg, out);
    else if (opt.command == "eval") cmd_eval(cfg, out);
    else throw ConfigError("unknown command '" + opt.command + "'");
    return kOk;
  } catch (const GateFailure& e) {
    err << kToolName << ": quality gate failed: " << e.what() << "\n";
    return kQualityGate;
  } catch (const ArgumentError& e) {
    err << kToolName << ": configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SchemaError& e) {
    err << kToolName << ": configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    err << kToolName << ": data error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    err << kToolName << ": data error: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << kToolName << ": data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << kToolName << ": data error: " << e.what() << "\n";
    return kDataError;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Outlier and noise screening for tabular affidavit data"};
  app.require_subcommand(1);
  Options opt;
  std::string config, out_dir;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"prepare", "Select attributes, convert valuations, homogenize areas, classify declared values"},
      {"proc1", "Screen ranked input-target bins with LOF"},
      {"proc2", "LOF/DBSCAN vote, classifier refinement and K-Means attribute ranking"},
      {"synth", "Generate a synthetic dataset with injected anomalies"},
      {"eval", "Score a proc2 report against a ground-truth file"}};
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> out_opts, seed_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON configuration file")->required();
    out_opts.push_back(sub->add_option("--out", out_dir, "Output directory (overrides output_dir)"));
    seed_opts.push_back(sub->add_option("--seed", seed, "Seed (overrides seed)"));
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, ee;
    const int code = app.exit(e, o, ee);
    out << o.str();
    err << ee.str();
    return code == 0 ? kOk : kConfigError;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    opt.command = subs[i]->get_name();
    opt.config_path = config;
    if (out_opts[i]->count()) opt.out_dir = out_dir;
    if (seed_opts[i]->count()) opt.seed = seed;
  }
  return execute(opt, out, err);
}

}  // namespace fieldscan::cli
