#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fieldscan/dataset.hpp"
#include "fieldscan/errors.hpp"
#include "fieldscan/information.hpp"

namespace fieldscan {

/// Naive Bayes over nominal attributes with add-one smoothed conditionals.
struct BayesModel {
  struct Table {
    std::string attribute;
    std::size_t column = 0;                  // position in the training schema
    std::vector<std::string> labels;         // order of first appearance
    std::vector<std::vector<double>> prob;   // [class][label]
    std::vector<double> unseen;              // [class], probability of a label never seen in training
  };

  std::string target;
  std::vector<std::string> classes;  // order of first appearance
  std::vector<double> priors;
  std::vector<Table> tables;
};

struct Prediction {
  std::string label;
  double posterior = 0;            // of `label`
  std::vector<double> posteriors;  // per class, model class order
};

/// Priors are class frequencies; P(v | c) = (n(v, c) + 1) / (n(c) + |V|) with
/// n(c) counting rows of class c where the attribute is observed and V the
/// attribute's training labels.
inline BayesModel nb_train(const Dataset& ds, std::string_view target) {
  const auto t = ds.index_of(target);
  if (ds.schema()[t].kind != AttributeKind::Nominal)
    throw SchemaError("target '" + std::string(target) + "' must be nominal");
  const auto enc = info_detail::encode_target(ds, t);
  if (enc.classes.empty()) throw DataError("cannot train on a dataset without observed classes");
  const std::size_t k = enc.classes.size();

  BayesModel m;
  m.target = std::string(target);
  m.classes = enc.classes;
  std::vector<double> class_n(k, 0.0);
  double total = 0;
  for (int code : enc.codes)
    if (code >= 0) {
      class_n[static_cast<std::size_t>(code)] += 1;
      total += 1;
    }
  for (double n : class_n) m.priors.push_back(n / total);

  for (std::size_t c = 0; c < ds.num_attributes(); ++c) {
    if (c == t) continue;
    if (ds.schema()[c].kind == AttributeKind::Numeric)
      throw SchemaError("naive Bayes needs nominal attributes; discretize numeric attribute '" +
                        ds.schema()[c].name + "' first");
    BayesModel::Table tab;
    tab.attribute = ds.schema()[c].name;
    tab.column = c;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<double>> counts(k);
    std::vector<double> observed(k, 0.0);
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      const auto& v = ds.at(r, c);
      if (enc.codes[r] < 0 || v.is_missing()) continue;
      auto [it, fresh] = index.try_emplace(v.as_label(), tab.labels.size());
      if (fresh) {
        tab.labels.push_back(v.as_label());
        for (auto& row : counts) row.push_back(0.0);
      }
      const auto cls = static_cast<std::size_t>(enc.codes[r]);
      counts[cls][it->second] += 1;
      observed[cls] += 1;
    }
    const double width = static_cast<double>(tab.labels.size());
    tab.prob.resize(k);
    tab.unseen.resize(k);
    for (std::size_t cls = 0; cls < k; ++cls) {
      const double denom = observed[cls] + width;
      for (double n : counts[cls]) tab.prob[cls].push_back((n + 1.0) / denom);
      tab.unseen[cls] = denom > 0 ? 1.0 / denom : 1.0;
    }
    m.tables.push_back(std::move(tab));
  }
  return m;
}

/// Posterior over classes for a row shaped like the training schema. Missing
/// attributes are skipped; ties go to the earlier class.
inline Prediction nb_predict(const BayesModel& model, std::span<const Value> row) {
  const std::size_t k = model.classes.size();
  std::vector<double> logp(k);
  for (std::size_t cls = 0; cls < k; ++cls)
    logp[cls] = model.priors[cls] > 0 ? std::log(model.priors[cls]) : -INFINITY;
  for (const auto& tab : model.tables) {
    if (tab.column >= row.size()) throw SchemaError("row is narrower than the training schema");
    const auto& v = row[tab.column];
    if (v.is_missing()) continue;
    if (!v.is_label()) throw SchemaError("attribute '" + tab.attribute + "' expects a label");
    auto it = std::find(tab.labels.begin(), tab.labels.end(), v.as_label());
    for (std::size_t cls = 0; cls < k; ++cls) {
      const double p = it == tab.labels.end() ? tab.unseen[cls]
                                              : tab.prob[cls][static_cast<std::size_t>(it - tab.labels.begin())];
      logp[cls] += std::log(p);
    }
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  Prediction out;
  out.posteriors.resize(k);
  double z = 0;
  for (std::size_t cls = 0; cls < k; ++cls) {
    out.posteriors[cls] = std::exp(logp[cls] - top);
    z += out.posteriors[cls];
  }
  for (auto& p : out.posteriors) p /= z;
  const auto best = static_cast<std::size_t>(std::max_element(logp.begin(), logp.end()) - logp.begin());
  out.label = model.classes[best];
  out.posterior = out.posteriors[best];
  return out;
}

inline Prediction nb_predict(const BayesModel& model, const Dataset& ds, std::size_t r) {
  return nb_predict(model, ds.row(r));
}

}  // namespace fieldscan
