// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace fieldscan;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool ok = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

int cli(const std::string& command, const fs::path& config, const std::string& extra = "") {
  const std::string cmd = std::string("\"") + FIELDSCAN_CLI + "\" " + command + " --config \"" + config.string() +
                          "\" " + extra + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

/// Scratch area for CLI runs, wiped on construction and destruction.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("fieldscan_acceptance_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const Json& j) const {
    spit(dir / name, j.dump(2));
    return dir / name;
  }
};

Dataset affidavit_sample(std::size_t n, std::uint64_t seed, double rate) {
  const auto ds = generate(affidavit_like_spec(n, seed));
  InjectionSpec is;
  is.rate = rate;
  is.seed = seed + 1;
  is.target_attrs = numeric_attributes(ds);
  return inject(ds, is).data;
}

/// Flagged row ids of LOF run directly on a bin's two-column projection.
std::vector<RowId> standalone_bin(const Bin& bin, const LofParams& p, bool use_oracle) {
  const std::size_t cols[] = {0, 1};
  auto data = bin.data.select_rows(complete_rows(bin.data, cols));
  if (data.num_rows() < p.k + 1) return {};
  if (data.schema()[0].kind == AttributeKind::Numeric)
    data = znormalize(data, std::vector<std::string>{bin.input_attribute});
  const auto scores = use_oracle ? oracle::lof(oracle::gower(data), p.k).scores : lof_scores(data, p.k).scores;
  std::vector<RowId> ids;
  for (std::size_t r = 0; r < data.num_rows(); ++r)
    if (scores[r] > p.threshold) ids.push_back(data.row_id(r));
  return ids;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  // Published tables depend on unpublished data, so only report shapes are checkable.
  const auto ds = affidavit_sample(1000, 11, 0.05);
  ProcedureConfig cfg;
  const auto p1 = procedure_one(ds, "val_decl", cfg);
  bool ok = p1.bins.size() == cfg.n_bins;
  for (const auto& b : p1.bins) {
    ok = ok && b.outlier_count == b.outlier_row_ids.size() && b.outlier_count <= b.rows_screened;
    ok = ok && b.profile.input.has_value() == (b.outlier_count > 0);
    ok = ok && b.target_attribute == "val_decl";
  }
  const auto p2 = procedure_two(ds, cfg);
  const auto& rep = p2.report;
  ok = ok && rep.flagged_fraction >= 0 && rep.flagged_fraction <= 1;
  ok = ok && rep.flagged_row_ids.size() >= 2 && p2.ranking.entries.size() == ds.num_attributes();
  for (std::size_t i = 1; i < p2.ranking.entries.size(); ++i)
    ok = ok && p2.ranking.entries[i - 1].distance >= p2.ranking.entries[i].distance;
  return {ok,
          "original result tables not reproducible (source data, hyperparameters, FX/CPI series and combination rules "
          "unpublished); bin-report and ranking shapes verified, property suites substitute (" +
              std::to_string(p1.bins.size()) + " bins, " + std::to_string(p2.ranking.entries.size()) +
              " ranked attributes, flagged fraction " + fmt(rep.flagged_fraction) + ")"};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  constexpr std::size_t kFixtures = 24;
  std::size_t passed = 0, max_rows = 0;
  double worst = 0;
  for (std::size_t i = 0; i < kFixtures; ++i) {
    const auto ds = fixtures::random_dataset(1000 + i, fixtures::oracle_shape(i));
    max_rows = std::max(max_rows, ds.num_rows());
    const auto d = oracle::gower(ds);
    bool ok = true;

    const std::size_t k = std::min<std::size_t>(2 + i % 6, ds.num_rows() - 1);
    const auto lof = lof_scores(ds, k);
    const auto ref = oracle::lof(d, k);
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      const double err = std::fabs(lof.scores[r] - ref.scores[r]) / std::max(1.0, std::fabs(ref.scores[r]));
      worst = std::max(worst, err);
      ok = ok && err <= 1e-9;
    }

    const double eps = 0.05 + 0.02 * static_cast<double>(i % 5);
    const std::size_t min_pts = 2 + i % 4;
    ok = ok && dbscan(ds, eps, min_pts).labels == oracle::dbscan(d, eps, min_pts);

    const std::size_t kk = 2 + i % 3;
    const auto km = kmeans(ds, kk, i, 100, 5);
    const auto km_ref = oracle::kmeans(ds, kk, i, 100, 5);
    ok = ok && km.assignment == km_ref.assignment;
    for (std::size_t j = 0; j < kk; ++j)
      for (std::size_t c = 0; c < km.centroids[j].size(); ++c)
        ok = ok && std::fabs(km.centroids[j][c] - km_ref.centroids[j][c]) <= 1e-9;
    passed += ok;
  }
  const double secs = seconds_since(t0);
  return {passed == kFixtures && max_rows <= 64 && secs < 10,
          std::to_string(passed) + "/" + std::to_string(kFixtures) + " fixtures (<= " + std::to_string(max_rows) +
              " rows) match LOF/DBSCAN/K-Means oracles, worst LOF relative error " + fmt(worst, 2) + ", " +
              fmt(secs, 3) + " s"};
}

Verdict criterion3() {
  const std::vector<double> counts{9, 5};
  const double h = entropy(counts);
  bool ok = std::fabs(h - 0.9403) <= 1e-4 && std::fabs(h - oracle::entropy(counts)) <= 1e-12;
  double worst = 0;
  std::size_t checked = 0;
  for (const auto& ds : {fixtures::weather_nominal(), fixtures::weather_numeric()}) {
    const auto t = ds.index_of("play");
    std::vector<std::size_t> rows(ds.num_rows());
    std::iota(rows.begin(), rows.end(), 0);
    for (const auto& s : attribute_scores(ds, "play")) {
      const auto ref = oracle::gain(ds, ds.index_of(s.attribute), t, rows);
      const double err = std::max({std::fabs(s.gain - ref.gain), std::fabs(s.gain_ratio - ref.gain_ratio),
                                   std::fabs(s.split_info - ref.split_info)});
      worst = std::max(worst, err);
      ok = ok && err <= 1e-9;
      ++checked;
    }
  }
  return {ok && checked == 8, "entropy({9,5}) = " + fmt(h, 6) + "; " + std::to_string(checked) +
                                  " attribute gains on the 14-row fixture match the partition oracle (max error " +
                                  fmt(worst, 2) + ")"};
}

Verdict criterion4() {
  Scratch s("c4");
  const auto t0 = Clock::now();
  const auto synth = s.write("synth.json", {{"seed", 4},
                                            {"output_dir", "synth"},
                                            {"synth",
                                             {{"n_rows", 5000},
                                              {"preset", "affidavit_like"},
                                              {"injection", {{"rate", 0.05}, {"magnitude", 8}}}}}});
  if (cli("synth", synth) != 0) return {false, "synth command failed"};
  const auto t1 = Clock::now();
  const auto proc2 = s.write("proc2.json", {{"dataset", "synth/synth.csv"}, {"output_dir", "proc2"}});
  if (cli("proc2", proc2) != 0) return {false, "proc2 command failed"};
  const double proc2_secs = seconds_since(t1);
  const auto eval = s.write("eval.json", {{"output_dir", "eval"},
                                          {"eval",
                                           {{"report", "proc2/proc2_report.json"},
                                            {"truth", "synth/synth_truth.csv"},
                                            {"recall_floor", 0.6}}}});
  const int code = cli("eval", eval);
  const double total = seconds_since(t0);
  if (code != 0 && code != 4) return {false, "eval command failed with exit " + std::to_string(code)};
  const auto doc = code == 0 ? Json::parse(slurp(s.dir / "eval/eval.json"))["payload"] : Json{};
  const double recall = code == 0 ? doc["recall"].get<double>() : 0.0;
  return {code == 0 && recall >= 0.6 && total < 60,
          "n=5000, 24 attributes, 5% injected at m=8: recall " + fmt(recall) +
              (code == 0 ? ", precision " + fmt(doc["precision"].get<double>()) : std::string()) + "; proc2 " +
              fmt(proc2_secs, 3) + " s, full run " + fmt(total, 3) + " s"};
}

Verdict criterion5() {
  std::size_t hits = 0;
  std::string misses;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto ds = generate(affidavit_like_spec(5000, 5000 + t));
    const auto numeric = numeric_attributes(ds);
    const auto& attr = numeric[t % numeric.size()];
    InjectionSpec is;
    is.rate = 0.01;
    is.magnitude = 8;
    is.sign = OutlierSign::Above;
    is.seed = 6000 + t;
    is.target_attrs = {attr};
    ProcedureConfig cfg;
    cfg.seed = t;
    const auto res = procedure_two(inject(ds, is).data, cfg);
    if (!res.ranking.entries.empty() && res.ranking.entries[0].attribute == attr) ++hits;
    else misses += (misses.empty() ? "" : ", ") + attr;
  }
  return {hits >= 9, std::to_string(hits) + "/10 seeded single-attribute trials rank the injected attribute first" +
                         (misses.empty() ? std::string() : " (missed: " + misses + ")")};
}

Verdict criterion6() {
  std::size_t fixtures_run = 0, bins = 0, mismatches = 0, flagged = 0;
  auto check = [&](const Dataset& ds, const std::string& target, const ProcedureConfig& cfg) {
    const auto res = procedure_one(ds, target, cfg);
    const auto built = build_bins(ds, target, cfg.n_bins);
    ++fixtures_run;
    for (std::size_t b = 0; b < built.size(); ++b) {
      ++bins;
      flagged += res.bins[b].outlier_count;
      if (res.bins[b].outlier_row_ids != standalone_bin(built[b], cfg.lof, false)) ++mismatches;
      if (res.bins[b].outlier_row_ids != standalone_bin(built[b], cfg.lof, true)) ++mismatches;
    }
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto shape = fixtures::oracle_shape(seed);
    shape.numeric = 2;
    shape.rows = std::max<std::size_t>(shape.rows, 16);
    auto ds = fixtures::random_dataset(200 + seed, shape);
    Rng rng(seed);
    std::vector<Value> y;
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      const auto& v = ds.at(r, 0);
      const bool high = v.is_number() && v.as_number() > 2.5;
      y.emplace_back(std::string(rng.uniform() < 0.85 ? (high ? "hi" : "lo") : "mid"));
    }
    ds = ds.with_column({"y", AttributeKind::Nominal}, std::move(y));
    ProcedureConfig cfg;
    cfg.lof = {4, 1.2};
    cfg.n_bins = ds.num_attributes() - 1;
    check(ds, "y", cfg);
  }
  check(affidavit_sample(400, 21, 0.05), "val_decl", ProcedureConfig{});
  return {mismatches == 0, std::to_string(bins) + " bins over " + std::to_string(fixtures_run) + " fixtures (" +
                               std::to_string(flagged) + " flagged rows) equal standalone and oracle LOF on the "
                               "bin projection; " + std::to_string(mismatches) + " mismatches"};
}

Verdict criterion7() {
  const fs::path fx_dir(FIELDSCAN_FIXTURES);
  CsvOptions opts;
  opts.kind_hints = {{"ano", AttributeKind::Numeric}, {"valor", AttributeKind::Numeric},
                     {"monto_declarado", AttributeKind::Numeric}};
  PrepConfig c;
  c.keep = std::vector<std::string>{"persona_id", "ano", "tipo_bien_s"};
  c.value_column = "valor";
  c.currency_column = "moneda";
  c.year_column = "ano";
  c.area_column = "superficie";
  c.area_unit_column = "unidad";
  c.declared_column = "monto_declarado";
  c.reference_column = "valuacion_fiscal";
  c.fx = FxTable::from_csv(slurp(fx_dir / "fx.csv"));
  c.cpi = CpiTable::from_csv(slurp(fx_dir / "cpi.csv"), 2012);
  const auto expected = slurp(fx_dir / "prepared_expected.csv");
  const bool library = to_csv(prepare(load_csv(slurp(fx_dir / "affidavits10.csv"), opts), c).data) == expected;

  Scratch s("c7");
  for (const auto* f : {"affidavits10.csv", "fx.csv", "cpi.csv", "prepare.json"})
    fs::copy_file(fx_dir / f, s.dir / f);
  const bool via_cli = cli("prepare", s.dir / "prepare.json") == 0 && slurp(s.dir / "out_prepare/prepared.csv") == expected;

  const bool factors = homogenize_area(1, AreaUnit::SquareMetre) == 1.0 &&
                       homogenize_area(1, AreaUnit::Hectare) == 10000.0 &&
                       homogenize_area(1, AreaUnit::SquareKilometre) == 1000000.0 &&
                       homogenize_area(1, AreaUnit::SquareFoot) == 0.09290304 &&
                       homogenize_area(2, AreaUnit::Hectare) == 20000.0;

  const std::vector<std::optional<double>> sweep{std::nullopt, 0.0, -1.0, 1e-300, 0.5, 0.89, 0.9, 1.0,
                                                 1.1, 1.11, 2.0, 1e300, std::numeric_limits<double>::infinity()};
  std::size_t cases = 0, total = 0;
  std::set<DeclaredValue> labels;
  for (const auto& d : sweep)
    for (const auto& r : sweep)
      for (double tol : {0.001, 0.05, 0.1, 0.25, 0.5, 0.999}) {
        ++cases;
        try {
          const auto v = classify_declared_value(d, r, tol).value;
          const auto l = to_label(v);
          if (l == "Fiscal" || l == "Subfiscal" || l == "Market" || l == "NotDeclared") ++total;
          labels.insert(v);
        } catch (...) {
        }
      }
  return {library && via_cli && factors && total == cases && labels.size() == 4,
          std::string("10-row fixture byte-identical (library ") + (library ? "yes" : "no") + ", CLI " +
              (via_cli ? "yes" : "no") + "); area factors " + (factors ? "exact" : "inexact") +
              "; classify_declared_value total on " + std::to_string(total) + "/" + std::to_string(cases) +
              " sweep cases"};
}

Verdict criterion8() {
  Scratch s("c8");
  const fs::path fx_dir(FIELDSCAN_FIXTURES);
  for (const auto* f : {"affidavits10.csv", "fx.csv", "cpi.csv", "prepare.json"})
    fs::copy_file(fx_dir / f, s.dir / f);
  const auto synth = s.write("synth.json", {{"seed", 9},
                                            {"output_dir", "synth"},
                                            {"synth", {{"n_rows", 800}, {"preset", "affidavit_like"},
                                                       {"injection", {{"rate", 0.05}}}}}});
  const auto proc1 = s.write("proc1.json", {{"dataset", "synth/synth.csv"},
                                            {"output_dir", "proc1"},
                                            {"proc1", {{"target", "val_decl"}, {"export_flagged", true}}}});
  const auto proc2 = s.write("proc2.json", {{"dataset", "synth/synth.csv"}, {"output_dir", "proc2"}, {"seed", 3}});
  const auto eval = s.write("eval.json", {{"output_dir", "eval"},
                                          {"eval", {{"report", "proc2/proc2_report.json"},
                                                    {"truth", "synth/synth_truth.csv"}}}});
  const std::vector<std::pair<std::string, fs::path>> steps{{"synth", synth},
                                                            {"prepare", s.dir / "prepare.json"},
                                                            {"proc1", proc1},
                                                            {"proc2", proc2},
                                                            {"eval", eval}};
  std::map<std::string, std::string> first;
  std::size_t files = 0, differing = 0;
  for (int round = 0; round < 2; ++round) {
    for (const auto& [cmd, cfg] : steps)
      if (cli(cmd, cfg) != 0) return {false, cmd + " command failed"};
    for (const auto& entry : fs::recursive_directory_iterator(s.dir)) {
      if (!entry.is_regular_file() || entry.path().parent_path() == s.dir) continue;
      const auto key = fs::relative(entry.path(), s.dir).string();
      if (round == 0) {
        first[key] = slurp(entry.path());
      } else {
        ++files;
        differing += first.count(key) == 0 || first[key] != slurp(entry.path());
      }
    }
  }
  const bool rerun_ok = files == first.size() && files >= 10 && differing == 0;

  std::size_t datasets = 0, violations = 0, provisional_union = 0, removed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = fixtures::random_dataset(
        7000 + seed,
        {.rows = 30 + (seed * 13) % 91, .numeric = 1 + seed % 3, .nominal = seed % 3, .labels = 2 + seed % 3,
         .missing = seed % 4 == 0 ? 0.03 : 0.0, .duplicate = seed % 7 == 0 ? 0.1 : 0.0});
    ProcedureConfig cfg;
    cfg.lof = {3 + seed % 8, 1.1 + 0.1 * static_cast<double>(seed % 5)};
    cfg.dbscan = {0.04 + 0.02 * static_cast<double>(seed % 5), 3 + seed % 3};
    cfg.vote.classifier_quorum = 1 + seed % 3;
    cfg.seed = seed;
    cfg.vote.phase1_rule = Phase1Rule::Union;
    const auto u = procedure_two(ds, cfg).report;
    cfg.vote.phase1_rule = Phase1Rule::Intersection;
    const auto x = procedure_two(ds, cfg).report;
    ++datasets;
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      violations += x.provisional[r] && !u.provisional[r];
      violations += u.final_flags[r] && !u.provisional[r];
      violations += x.final_flags[r] && !x.provisional[r];
      provisional_union += u.provisional[r];
      removed += u.provisional[r] && !u.final_flags[r];
    }
  }
  return {rerun_ok && violations == 0,
          std::to_string(files) + " CLI output files byte-identical across reruns (" + std::to_string(differing) +
              " differ); Intersection within Union and refine-only-removes on " + std::to_string(datasets) +
              " seeded datasets, " + std::to_string(violations) + " violations (" + std::to_string(removed) + " of " +
              std::to_string(provisional_union) + " provisional flags removed by refinement)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
  int failures = 0;
  for (const auto& [n, run] : criteria) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.ok;
    std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << n << ": " << v.detail << " [" << fmt(seconds_since(t0), 3)
              << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
