#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/information.hpp"
#include "fieldscan/rules.hpp"

namespace fieldscan {

/// Ordered PRISM rule list with a fallback class for uncovered rows.
struct RuleList {
  std::string target;
  std::vector<Rule> rules;
  std::string default_label;  // majority training class

  std::string predict(const Dataset& ds, std::size_t r) const {
    for (const auto& rule : rules)
      if (rule.covers(ds, r)) return rule.consequent;
    return default_label;
  }
};

namespace prism_detail {

struct Candidate {
  std::size_t column = 0;
  std::size_t label = 0;
  std::size_t covered = 0;
  std::size_t correct = 0;
};

// a/b > c/d on non-negative counts, without division.
inline bool more_accurate(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  return a * d > c * b;
}

}  // namespace prism_detail

/// PRISM covering induction on an all-nominal dataset.
///
/// Classes are visited in order of first appearance. For each class the rule
/// grows one attribute=value test at a time, taking the most accurate test
/// (ties: larger coverage, then schema order, then label order) until it is
/// perfect on the remaining rows or no test improves it; rows it covers are
/// then removed and the next rule starts, until no row of the class remains.
/// Each class starts again from the full training set. Coverage and accuracy
/// of the returned rules are measured on the full training set.
inline RuleList prism_build(const Dataset& ds, std::string_view target) {
  using prism_detail::Candidate;
  using prism_detail::more_accurate;
  const auto t = ds.index_of(target);
  if (ds.schema()[t].kind != AttributeKind::Nominal)
    throw SchemaError("target '" + std::string(target) + "' must be nominal");
  for (std::size_t c = 0; c < ds.num_attributes(); ++c)
    if (c != t && ds.schema()[c].kind == AttributeKind::Numeric)
      throw SchemaError("PRISM needs nominal attributes; discretize numeric attribute '" +
                        ds.schema()[c].name + "' first");

  const auto enc = info_detail::encode_target(ds, t);
  const std::size_t n_cols = ds.num_attributes();

  // Label codes per column, in order of first appearance; -1 for Missing.
  std::vector<std::vector<std::string>> labels(n_cols);
  std::vector<std::vector<int>> code(n_cols, std::vector<int>(ds.num_rows(), -1));
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c == t) continue;
    std::map<std::string, int> index;
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      const auto& v = ds.at(r, c);
      if (v.is_missing()) continue;
      auto [it, fresh] = index.try_emplace(v.as_label(), static_cast<int>(labels[c].size()));
      if (fresh) labels[c].push_back(v.as_label());
      code[c][r] = it->second;
    }
  }

  std::vector<std::size_t> training;
  std::vector<std::size_t> class_total(enc.classes.size(), 0);
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    if (enc.codes[r] >= 0) {
      training.push_back(r);
      ++class_total[static_cast<std::size_t>(enc.codes[r])];
    }

  RuleList out;
  out.target = std::string(target);
  if (!enc.classes.empty()) {
    const auto best = std::max_element(class_total.begin(), class_total.end()) - class_total.begin();
    out.default_label = enc.classes[static_cast<std::size_t>(best)];
  }

  for (std::size_t k = 0; k < enc.classes.size(); ++k) {
    const int cls = static_cast<int>(k);
    std::vector<std::size_t> remaining = training;
    auto has_class = [&](const std::vector<std::size_t>& rows) {
      for (auto r : rows)
        if (enc.codes[r] == cls) return true;
      return false;
    };
    while (has_class(remaining)) {
      Rule rule;
      rule.consequent = enc.classes[k];
      std::vector<char> used(n_cols, 0);
      std::vector<std::size_t> covered = remaining;
      std::size_t correct = 0;
      for (auto r : covered) correct += enc.codes[r] == cls;

      while (correct < covered.size()) {
        std::optional<Candidate> best;
        for (std::size_t c = 0; c < n_cols; ++c) {
          if (c == t || used[c]) continue;
          std::vector<Candidate> cands(labels[c].size());
          for (std::size_t l = 0; l < cands.size(); ++l) cands[l] = {c, l, 0, 0};
          for (auto r : covered) {
            const int l = code[c][r];
            if (l < 0) continue;
            auto& cand = cands[static_cast<std::size_t>(l)];
            ++cand.covered;
            cand.correct += enc.codes[r] == cls;
          }
          for (const auto& cand : cands) {
            if (cand.covered == 0) continue;
            if (!best || more_accurate(cand.correct, cand.covered, best->correct, best->covered) ||
                (cand.correct * best->covered == best->correct * cand.covered && cand.covered > best->covered))
              best = cand;
          }
        }
        if (!best || !more_accurate(best->correct, best->covered, correct, covered.size())) break;
        used[best->column] = 1;
        rule.antecedent.push_back(Condition::nominal(ds.schema()[best->column].name, labels[best->column][best->label]));
        std::vector<std::size_t> next;
        for (auto r : covered)
          if (code[best->column][r] == static_cast<int>(best->label)) next.push_back(r);
        covered = std::move(next);
        correct = best->correct;
      }

      std::vector<char> hit(ds.num_rows(), 0);
      for (auto r : covered) hit[r] = 1;
      std::vector<std::size_t> rest;
      for (auto r : remaining)
        if (!hit[r]) rest.push_back(r);
      remaining = std::move(rest);
      out.rules.push_back(std::move(rule));
    }
  }
  for (auto& rule : out.rules) score_rule(rule, ds, target);
  return out;
}

}  // namespace fieldscan
