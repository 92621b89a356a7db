#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/information.hpp"
#include "fieldscan/rules.hpp"

namespace fieldscan {

struct C45Params {
  std::size_t min_leaf = 2;
  double min_gain = 1e-6;
  double confidence = 0.25;
  bool prune = true;
};

/// Node of a C4.5 tree. Every node carries its majority label and support so
/// that pruning can fold it into a leaf in place.
struct TreeNode {
  std::string label;
  std::size_t support = 0;
  std::size_t correct = 0;  // rows at the node whose class equals `label`

  bool leaf = true;
  std::string attribute;
  bool numeric = false;
  double threshold = 0;                     // numeric: children {<= threshold, > threshold}
  std::vector<std::string> branch_labels;   // nominal: one child per label
  std::vector<TreeNode> children;
  std::size_t default_branch = 0;           // taken by Missing or unseen labels

  double purity() const { return support == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(support); }
};

struct DecisionTree {
  std::string target;
  std::vector<std::string> classes;  // order of first appearance in training
  TreeNode root;

  std::string predict(const Dataset& ds, std::size_t r) const {
    const TreeNode* node = &root;
    while (!node->leaf) {
      const auto& v = ds.at(r, ds.index_of(node->attribute));
      std::size_t branch = node->default_branch;
      if (node->numeric) {
        if (v.is_number()) branch = v.as_number() <= node->threshold ? 0 : 1;
      } else if (v.is_label()) {
        auto it = std::find(node->branch_labels.begin(), node->branch_labels.end(), v.as_label());
        if (it != node->branch_labels.end())
          branch = static_cast<std::size_t>(it - node->branch_labels.begin());
      }
      node = &node->children[branch];
    }
    return node->label;
  }

  std::size_t leaf_count() const { return count_leaves(root); }

 private:
  static std::size_t count_leaves(const TreeNode& n) {
    if (n.leaf) return 1;
    std::size_t total = 0;
    for (const auto& c : n.children) total += count_leaves(c);
    return total;
  }
};

/// Upper limit of the binomial error rate: the p at which observing at most
/// `errors` mistakes in `n` trials has probability `confidence`.
inline double pessimistic_error_rate(double errors, double n, double confidence) {
  if (n <= 0) return 0;
  if (errors >= n) return 1.0;
  return boost::math::ibeta_inv(errors + 1.0, n - errors, 1.0 - confidence);
}

namespace c45_detail {

class Builder {
 public:
  Builder(const Dataset& ds, std::size_t target, const C45Params& params)
      : ds_(ds), target_(target), params_(params), enc_(info_detail::encode_target(ds, target)) {}

  const std::vector<std::string>& classes() const { return enc_.classes; }

  std::vector<std::size_t> training_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < ds_.num_rows(); ++r)
      if (enc_.codes[r] >= 0) rows.push_back(r);
    return rows;
  }

  TreeNode grow(const std::vector<std::size_t>& rows) {
    TreeNode node;
    std::vector<std::size_t> counts(enc_.classes.size(), 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(enc_.codes[r])];
    // First maximum in class order is the first-occurrence tie-break.
    const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    node.label = enc_.classes[best];
    node.support = rows.size();
    node.correct = counts[best];
    if (node.correct == rows.size() || rows.size() < 2 * params_.min_leaf) return node;

    std::optional<AttributeScore> chosen;
    std::size_t chosen_col = 0;
    for (std::size_t c = 0; c < ds_.num_attributes(); ++c) {
      if (c == target_) continue;
      auto s = info_detail::score_attribute(ds_, c, rows, enc_.codes, enc_.classes.size(), params_.min_leaf);
      if (!(s.gain > 0) || s.gain < params_.min_gain) continue;
      if (!chosen || s.gain_ratio > chosen->gain_ratio) {
        chosen = s;
        chosen_col = c;
      }
    }
    if (!chosen) return node;

    node.leaf = false;
    node.attribute = chosen->attribute;
    node.numeric = ds_.schema()[chosen_col].kind == AttributeKind::Numeric;
    std::vector<std::vector<std::size_t>> parts;
    std::vector<std::size_t> unknown;
    if (node.numeric) {
      node.threshold = *chosen->threshold;
      parts.resize(2);
      for (auto r : rows) {
        const auto& v = ds_.at(r, chosen_col);
        if (v.is_missing()) unknown.push_back(r);
        else parts[v.as_number() <= node.threshold ? 0 : 1].push_back(r);
      }
    } else {
      std::map<std::string, std::size_t> branch_of;
      for (auto r : rows) {
        const auto& v = ds_.at(r, chosen_col);
        if (v.is_missing()) {
          unknown.push_back(r);
          continue;
        }
        auto [it, fresh] = branch_of.try_emplace(v.as_label(), parts.size());
        if (fresh) {
          parts.emplace_back();
          node.branch_labels.push_back(v.as_label());
        }
        parts[it->second].push_back(r);
      }
    }
    std::size_t largest = 0;
    for (std::size_t b = 1; b < parts.size(); ++b)
      if (parts[b].size() > parts[largest].size()) largest = b;
    node.default_branch = largest;
    if (!unknown.empty()) {
      auto& dst = parts[largest];
      dst.insert(dst.end(), unknown.begin(), unknown.end());
      std::sort(dst.begin(), dst.end());
    }
    for (const auto& part : parts) node.children.push_back(grow(part));
    if (params_.prune) prune(node);
    return node;
  }

 private:
  double leaf_estimate(const TreeNode& n) const {
    const double errors = static_cast<double>(n.support - n.correct);
    const double count = static_cast<double>(n.support);
    return count * pessimistic_error_rate(errors, count, params_.confidence);
  }

  double subtree_estimate(const TreeNode& n) const {
    if (n.leaf) return leaf_estimate(n);
    double total = 0;
    for (const auto& c : n.children) total += subtree_estimate(c);
    return total;
  }

  void prune(TreeNode& node) const {
    if (leaf_estimate(node) <= subtree_estimate(node) + 1e-9) {
      node.leaf = true;
      node.children.clear();
      node.branch_labels.clear();
      node.attribute.clear();
      node.numeric = false;
      node.threshold = 0;
      node.default_branch = 0;
    }
  }

  const Dataset& ds_;
  std::size_t target_;
  C45Params params_;
  info_detail::EncodedTarget enc_;
};

}  // namespace c45_detail

/// Top-down C4.5 induction with gain-ratio selection and pessimistic-error
/// pruning. Training rows are those with an observed class. Rows Missing
/// the split attribute follow the largest branch.
inline DecisionTree c45_build(const Dataset& ds, std::string_view target, const C45Params& params = {}) {
  const auto t = ds.index_of(target);
  if (ds.schema()[t].kind != AttributeKind::Nominal)
    throw SchemaError("target '" + std::string(target) + "' must be nominal");
  if (params.min_leaf < 1) throw ArgumentError("min_leaf must be at least 1");
  if (!(params.confidence > 0 && params.confidence < 1)) throw ArgumentError("confidence must lie in (0, 1)");
  c45_detail::Builder builder(ds, t, params);
  const auto rows = builder.training_rows();
  if (rows.empty()) throw DataError("cannot build a tree from an empty dataset");
  DecisionTree tree;
  tree.target = std::string(target);
  tree.classes = builder.classes();
  tree.root = builder.grow(rows);
  return tree;
}

namespace c45_detail {

inline void collect_rules(const TreeNode& node, std::vector<Condition>& path, std::vector<Rule>& out) {
  if (node.leaf) {
    // Merge numeric tests per attribute into one interval, keeping the order
    // in which attributes first appear on the path.
    std::vector<Condition> merged;
    for (const auto& cond : path) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Condition& m) {
        return !m.is_nominal() && !cond.is_nominal() && m.attribute == cond.attribute;
      });
      if (it == merged.end()) {
        merged.push_back(cond);
        continue;
      }
      if (cond.above) it->above = it->above ? std::max(*it->above, *cond.above) : *cond.above;
      if (cond.at_most) it->at_most = it->at_most ? std::min(*it->at_most, *cond.at_most) : *cond.at_most;
    }
    out.push_back({std::move(merged), node.label, 0, 0.0});
    return;
  }
  for (std::size_t b = 0; b < node.children.size(); ++b) {
    if (node.numeric)
      path.push_back(b == 0 ? Condition::interval(node.attribute, std::nullopt, node.threshold)
                            : Condition::interval(node.attribute, node.threshold, std::nullopt));
    else
      path.push_back(Condition::nominal(node.attribute, node.branch_labels[b]));
    collect_rules(node.children[b], path, out);
    path.pop_back();
  }
}

}  // namespace c45_detail

/// One rule per leaf, scored against `ds`, most covering first.
inline std::vector<Rule> tree_to_rules(const DecisionTree& tree, const Dataset& ds) {
  std::vector<Rule> rules;
  std::vector<Condition> path;
  c45_detail::collect_rules(tree.root, path, rules);
  for (auto& r : rules) score_rule(r, ds, tree.target);
  std::stable_sort(rules.begin(), rules.end(),
                   [](const Rule& a, const Rule& b) { return a.coverage > b.coverage; });
  return rules;
}

}  // namespace fieldscan
