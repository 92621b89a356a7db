#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"

namespace fieldscan {

/// One test of a rule antecedent: nominal equality, or a numeric interval
/// `above < x <= at_most` where either bound may be open.
struct Condition {
  std::string attribute;
  std::optional<std::string> equals;
  std::optional<double> above;
  std::optional<double> at_most;

  static Condition nominal(std::string attribute, std::string label) {
    return {std::move(attribute), std::move(label), std::nullopt, std::nullopt};
  }
  static Condition interval(std::string attribute, std::optional<double> above,
                            std::optional<double> at_most) {
    return {std::move(attribute), std::nullopt, above, at_most};
  }

  bool is_nominal() const noexcept { return equals.has_value(); }

  /// Missing never satisfies a condition.
  bool matches(const Value& v) const {
    if (v.is_missing()) return false;
    if (equals) return v.is_label() && v.as_label() == *equals;
    if (!v.is_number()) return false;
    const double x = v.as_number();
    if (above && !(x > *above)) return false;
    if (at_most && !(x <= *at_most)) return false;
    return true;
  }

  std::string to_string() const {
    if (equals) return attribute + " = " + *equals;
    if (above && at_most) return format_number(*above) + " < " + attribute + " <= " + format_number(*at_most);
    if (above) return attribute + " > " + format_number(*above);
    if (at_most) return attribute + " <= " + format_number(*at_most);
    return attribute + " is observed";
  }

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Conjunctive classification rule with its coverage statistics on some
/// dataset. accuracy = correctly covered / covered, 0 when nothing is covered.
struct Rule {
  std::vector<Condition> antecedent;
  std::string consequent;
  std::size_t coverage = 0;
  double accuracy = 0;

  bool covers(const Dataset& ds, std::size_t r) const {
    for (const auto& cond : antecedent)
      if (!cond.matches(ds.at(r, ds.index_of(cond.attribute)))) return false;
    return true;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < antecedent.size(); ++i) {
      if (i) out += " AND ";
      out += antecedent[i].to_string();
    }
    if (antecedent.empty()) out = "TRUE";
    return out + " -> " + consequent;
  }

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Recomputes coverage and accuracy of `rule` against `ds`, judging
/// correctness by the label in column `target`.
inline void score_rule(Rule& rule, const Dataset& ds, std::string_view target) {
  const auto t = ds.index_of(target);
  std::size_t covered = 0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    if (!rule.covers(ds, r)) continue;
    ++covered;
    const auto& v = ds.at(r, t);
    if (v.is_label() && v.as_label() == rule.consequent) ++correct;
  }
  rule.coverage = covered;
  rule.accuracy = covered == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(covered);
}

}  // namespace fieldscan
