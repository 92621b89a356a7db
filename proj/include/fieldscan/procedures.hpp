#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/detectors.hpp"
#include "fieldscan/distance.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/learners.hpp"
#include "fieldscan/stats.hpp"

namespace fieldscan {

struct LofParams {
  std::size_t k = 10;
  double threshold = 1.5;
};

struct DbscanParams {
  double eps = 0.15;
  std::size_t min_pts = 5;
};

enum class Phase1Rule { Union, Intersection };

/// How detector outputs are combined: phase one merges LOF flags with
/// DBSCAN noise; phase two keeps a provisional outlier only when at least
/// `classifier_quorum` of C4.5, PRISM and naive Bayes predict it.
struct VoteConfig {
  Phase1Rule phase1_rule = Phase1Rule::Union;
  std::size_t classifier_quorum = 2;

  void validate() const {
    if (classifier_quorum < 1 || classifier_quorum > 3)
      throw ArgumentError("classifier_quorum must lie in [1, 3]");
  }
};

struct RefineParams {
  std::size_t discretize_bins = 5;
  C45Params c45;
};

struct ProcedureConfig {
  LofParams lof;
  DbscanParams dbscan;
  VoteConfig vote;
  RefineParams refine;
  std::size_t n_bins = 6;
  std::uint64_t seed = 0;
  std::size_t kmeans_max_iter = 100;
  std::size_t kmeans_n_init = 25;
};

inline constexpr std::string_view kOutlierLabel = "outlier";
inline constexpr std::string_view kInlierLabel = "inlier";

// ---------------------------------------------------------------------------
// Procedure I: ranked input attributes screened against a nominal target.

/// Two-column projection (input attribute, target attribute) of a dataset.
struct Bin {
  std::string input_attribute;
  std::string target_attribute;
  Dataset data;

  std::string name() const { return input_attribute + "(" + target_attribute + ")"; }
};

/// Bins for the `n_bins` attributes with the highest gain ratio on `target`.
inline std::vector<Bin> build_bins(const Dataset& ds, std::string_view target, std::size_t n_bins) {
  const auto scores = attribute_scores(ds, target);
  if (n_bins < 1) throw ArgumentError("n_bins must be at least 1");
  if (n_bins > scores.size())
    throw ArgumentError("n_bins (" + std::to_string(n_bins) + ") exceeds the " +
                        std::to_string(scores.size()) + " available attributes");
  std::vector<Bin> bins;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const std::vector<std::string> cols{scores[i].attribute, std::string(target)};
    bins.push_back({scores[i].attribute, std::string(target), ds.project(cols)});
  }
  return bins;
}

/// Mean (numeric) or mode (nominal) of the input, and mode of the target,
/// over a bin's flagged rows. Empty when nothing was flagged.
struct SuspiciousProfile {
  std::optional<Value> input;
  bool input_is_mean = false;
  std::optional<Value> target_mode;
};

struct BinReport {
  std::string input_attribute;
  std::string target_attribute;
  std::size_t rows_screened = 0;
  std::size_t outlier_count = 0;
  std::vector<RowId> outlier_row_ids;
  SuspiciousProfile profile;
  bool skipped = false;
};

struct ProcedureOneResult {
  std::vector<BinReport> bins;
  std::vector<std::string> warnings;
};

/// Screens one bin: drops rows with a Missing cell, z-normalizes a numeric
/// input and flags rows whose Gower-space LOF exceeds the threshold.
inline BinReport screen_bin(const Bin& bin, const LofParams& lof, std::vector<std::string>* warnings = nullptr) {
  BinReport rep;
  rep.input_attribute = bin.input_attribute;
  rep.target_attribute = bin.target_attribute;
  const std::size_t cols[] = {0, 1};
  const auto keep = complete_rows(bin.data, cols);
  const auto data = bin.data.select_rows(keep);
  rep.rows_screened = data.num_rows();
  if (data.num_rows() < lof.k + 1) {
    rep.skipped = true;
    if (warnings)
      warnings->push_back("bin " + bin.name() + " skipped: " + std::to_string(data.num_rows()) +
                          " complete rows, LOF needs at least " + std::to_string(lof.k + 1));
    return rep;
  }
  const bool numeric = data.schema()[0].kind == AttributeKind::Numeric;
  const Dataset scaled = numeric ? znormalize(data, std::vector<std::string>{bin.input_attribute}) : data;
  const auto flags = lof_flag(lof_scores(scaled, lof.k), lof.threshold);

  std::vector<std::size_t> flagged;
  for (std::size_t r = 0; r < flags.size(); ++r)
    if (flags[r]) {
      flagged.push_back(r);
      rep.outlier_row_ids.push_back(data.row_id(r));
    }
  rep.outlier_count = flagged.size();
  if (!flagged.empty()) {
    const auto sub = data.select_rows(flagged);
    rep.profile.input_is_mean = numeric;
    if (numeric) rep.profile.input = Value(*column_stats(sub, bin.input_attribute).mean);
    else rep.profile.input = column_stats(sub, bin.input_attribute).mode;
    rep.profile.target_mode = column_stats(sub, bin.target_attribute).mode;
  }
  return rep;
}

/// Procedure I: rank attributes against the target, build input-output bins
/// and screen each with LOF. Reports follow the bin ranking.
inline ProcedureOneResult procedure_one(const Dataset& ds, std::string_view target, const ProcedureConfig& cfg) {
  ProcedureOneResult out;
  for (const auto& bin : build_bins(ds, target, cfg.n_bins)) out.bins.push_back(screen_bin(bin, cfg.lof, &out.warnings));
  return out;
}

// ---------------------------------------------------------------------------
// Procedure II: no target attribute.

inline std::vector<bool> combine_flags(const std::vector<bool>& lof, const std::vector<bool>& noise, Phase1Rule rule) {
  if (lof.size() != noise.size()) throw ArgumentError("flag vectors differ in length");
  std::vector<bool> out(lof.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = rule == Phase1Rule::Union ? (lof[i] || noise[i]) : (lof[i] && noise[i]);
  return out;
}

struct PhaseOneResult {
  LofResult lof;
  std::vector<bool> lof_flags;
  DbscanResult dbscan;
  std::vector<bool> noise;
  std::vector<bool> provisional;
};

/// LOF flags and DBSCAN noise on the whole dataset, merged by the vote rule.
template <DistanceSource D>
PhaseOneResult phase1_detect(const D& dist, const VoteConfig& vote, const LofParams& lof, const DbscanParams& db) {
  vote.validate();
  PhaseOneResult out;
  out.lof = lof_scores(dist, lof.k);
  out.lof_flags = lof_flag(out.lof, lof.threshold);
  out.dbscan = dbscan(dist, db.eps, db.min_pts);
  out.noise.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) out.noise[i] = out.dbscan.is_noise(i);
  out.provisional = combine_flags(out.lof_flags, out.noise, vote.phase1_rule);
  return out;
}

inline PhaseOneResult phase1_detect(const Dataset& ds, const VoteConfig& vote, const LofParams& lof,
                                    const DbscanParams& db) {
  if (ds.num_rows() < 2) throw ArgumentError("phase one needs at least 2 rows");
  return phase1_detect(PairwiseDistances(GowerMetric(ds)), vote, lof, db);
}

/// Copy of `ds` with every numeric attribute turned into equal-frequency
/// intervals. Columns with no observed value become all-Missing nominals.
inline Dataset discretize_all(const Dataset& ds, std::size_t n_bins) {
  Dataset out = ds;
  for (const auto& a : ds.schema().attributes()) {
    if (a.kind != AttributeKind::Numeric) continue;
    if (column_stats(ds, a.name).count == 0)
      out = out.with_column({a.name, AttributeKind::Nominal}, std::vector<Value>(ds.num_rows()));
    else
      out = discretize(out, a.name, n_bins, BinningMethod::EqualFrequency);
  }
  return out;
}

struct RefineResult {
  std::vector<bool> final_flags;
  bool skipped = false;
  std::vector<bool> c45_votes;
  std::vector<bool> prism_votes;
  std::vector<bool> nb_votes;
  std::vector<Rule> c45_rules;    // leaves predicting the outlier class
  std::vector<Rule> prism_rules;  // rules for the outlier class
};

inline std::string temporary_target_name(const Dataset& ds) {
  std::string name = "__provisional";
  while (ds.schema().contains(name)) name += "_";
  return name;
}

/// Second phase: C4.5 (raw attributes), PRISM and naive Bayes (discretized
/// copy) learn the provisional labels; a provisional outlier survives when
/// at least `quorum` of them predict it as an outlier. One-class provisional
/// labels skip the refinement.
inline RefineResult classifier_refine(const Dataset& ds, const std::vector<bool>& provisional, const VoteConfig& vote,
                                      const RefineParams& params = {}) {
  vote.validate();
  if (provisional.size() != ds.num_rows()) throw ArgumentError("provisional flags do not match the row count");
  RefineResult out;
  out.final_flags = provisional;
  const auto n_out = static_cast<std::size_t>(std::count(provisional.begin(), provisional.end(), true));
  if (n_out == 0 || n_out == provisional.size()) {
    out.skipped = true;
    return out;
  }

  const auto target = temporary_target_name(ds);
  std::vector<Value> labels;
  labels.reserve(ds.num_rows());
  for (bool f : provisional) labels.emplace_back(std::string(f ? kOutlierLabel : kInlierLabel));
  const auto labelled = ds.with_column({target, AttributeKind::Nominal}, std::move(labels));
  const auto binned = discretize_all(labelled, params.discretize_bins);

  const auto tree = c45_build(labelled, target, params.c45);
  const auto rules = prism_build(binned, target);
  const auto bayes = nb_train(binned, target);

  const std::size_t n = ds.num_rows();
  out.c45_votes.resize(n);
  out.prism_votes.resize(n);
  out.nb_votes.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.c45_votes[r] = tree.predict(labelled, r) == kOutlierLabel;
    out.prism_votes[r] = rules.predict(binned, r) == kOutlierLabel;
    out.nb_votes[r] = nb_predict(bayes, binned, r).label == kOutlierLabel;
    const std::size_t votes = out.c45_votes[r] + out.prism_votes[r] + out.nb_votes[r];
    out.final_flags[r] = provisional[r] && votes >= vote.classifier_quorum;
  }
  for (auto& rule : tree_to_rules(tree, labelled))
    if (rule.consequent == kOutlierLabel) out.c45_rules.push_back(std::move(rule));
  for (const auto& rule : rules.rules)
    if (rule.consequent == kOutlierLabel) out.prism_rules.push_back(rule);
  return out;
}

/// Per-row evidence behind a Procedure II verdict.
struct OutlierReport {
  std::size_t n_rows = 0;
  std::vector<RowId> row_ids;
  std::vector<RowId> flagged_row_ids;
  double flagged_fraction = 0;
  std::vector<double> lof_scores;
  std::vector<bool> lof_flags;
  std::vector<int> dbscan_labels;
  std::vector<bool> provisional;
  bool refinement_skipped = false;
  std::vector<bool> c45_votes;
  std::vector<bool> prism_votes;
  std::vector<bool> nb_votes;
  std::vector<bool> final_flags;
  std::vector<Rule> c45_rules;
  std::vector<Rule> prism_rules;
  std::vector<std::string> notes;
};

struct ProcedureTwoResult {
  OutlierReport report;
  AttributeRanking ranking;
};

/// Procedure II: LOF/DBSCAN vote, classifier refinement, then a 2-means
/// clustering of the flagged rows ranks attributes by centroid gap.
inline ProcedureTwoResult procedure_two(const Dataset& ds, const ProcedureConfig& cfg) {
  cfg.vote.validate();
  ProcedureTwoResult out;
  auto& rep = out.report;
  rep.n_rows = ds.num_rows();
  rep.row_ids = ds.row_ids();

  const auto p1 = phase1_detect(ds, cfg.vote, cfg.lof, cfg.dbscan);
  rep.lof_scores = p1.lof.scores;
  rep.lof_flags = p1.lof_flags;
  rep.dbscan_labels = p1.dbscan.labels;
  rep.provisional = p1.provisional;

  const auto refined = classifier_refine(ds, p1.provisional, cfg.vote, cfg.refine);
  rep.refinement_skipped = refined.skipped;
  rep.c45_votes = refined.c45_votes;
  rep.prism_votes = refined.prism_votes;
  rep.nb_votes = refined.nb_votes;
  rep.final_flags = refined.final_flags;
  rep.c45_rules = refined.c45_rules;
  rep.prism_rules = refined.prism_rules;
  if (refined.skipped) rep.notes.push_back("classifier refinement skipped: provisional labels have a single class");

  std::vector<std::size_t> flagged;
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    if (refined.final_flags[r]) {
      flagged.push_back(r);
      rep.flagged_row_ids.push_back(ds.row_id(r));
    }
  rep.flagged_fraction = ds.num_rows() == 0 ? 0.0
                                            : static_cast<double>(flagged.size()) / static_cast<double>(ds.num_rows());

  if (flagged.size() < 2) {
    rep.notes.push_back("attribute ranking empty: fewer than 2 flagged rows");
    return out;
  }
  const auto outlier_db = ds.select_rows(flagged);
  const auto clustering = kmeans(outlier_db, 2, cfg.seed, cfg.kmeans_max_iter, cfg.kmeans_n_init);
  out.ranking = centroid_attribute_distances(clustering, outlier_db);
  return out;
}

}  // namespace fieldscan
