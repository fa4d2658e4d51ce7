// End-to-end scoring of (aspect, sentiment) predictions.
//
// Counting is set based per sentence: for a class k, a sentence contributes a
// true positive when k is in both gold and predicted sets, a false positive
// when only predicted, a false negative when only gold.
//
//   ACD    classes are aspects; macro F1 averages over aspects present in gold.
//   ACSA   classes are (aspect, polarity) tuples with polarity positive or
//          negative; macro F1-PN averages over such tuples present in gold.
//          Neutral (or any other polarity) gold tuples are ignored.

#ifndef AXABSA_EVALUATION_HPP_
#define AXABSA_EVALUATION_HPP_

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"

namespace axabsa {

struct ClassScores {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool in_gold = false;

  void finalize() {
    precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
};

struct MetricsReport {
  double acd_f1_macro = 0.0;
  double acsa_f1_pn_macro = 0.0;
  std::map<std::string, ClassScores> acd;
  std::map<LabelTuple, ClassScores> acsa;
  std::size_t sentences = 0;
};

namespace detail {

template <typename Key>
double macro_over_gold(const std::map<Key, ClassScores>& classes) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [key, s] : classes) {
    if (!s.in_gold) continue;
    sum += s.f1;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

template <typename Key>
void count_sets(const std::set<Key>& gold, const std::set<Key>& pred,
                std::map<Key, ClassScores>& classes) {
  for (const auto& k : gold) {
    auto& s = classes[k];
    s.in_gold = true;
    if (pred.contains(k)) ++s.tp;
    else ++s.fn;
  }
  for (const auto& k : pred)
    if (!gold.contains(k)) ++classes[k].fp;
}

}  // namespace detail

inline MetricsReport evaluate(std::span<const PredictionRecord> gold,
                              std::span<const PredictionRecord> pred) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : pred) {
    if (p.labels.empty())
      throw ValidationError("evaluate: prediction for '" + p.id + "' has no labels");
    by_id.emplace(p.id, &p);
  }
  std::set<std::string> gold_ids;
  std::vector<std::string> missing;
  for (const auto& g : gold) {
    gold_ids.insert(g.id);
    if (!by_id.contains(g.id)) missing.push_back(g.id);
  }
  std::vector<std::string> extra;
  for (const auto& p : pred)
    if (!gold_ids.contains(p.id)) extra.push_back(p.id);
  if (!missing.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "evaluate: id sets differ; missing predictions:";
    for (const auto& id : missing) msg << ' ' << id;
    msg << "; predictions without gold:";
    for (const auto& id : extra) msg << ' ' << id;
    throw ValidationError(msg.str());
  }

  MetricsReport r;
  r.sentences = gold.size();
  for (const auto& g : gold) {
    const auto& p = *by_id.at(g.id);
    std::set<std::string> gold_aspects, pred_aspects;
    std::set<LabelTuple> gold_pn, pred_pn;
    for (const auto& t : g.labels) {
      gold_aspects.insert(t.aspect);
      if (is_pn_polarity(t.sentiment)) gold_pn.insert(t);
    }
    for (const auto& t : p.labels) {
      pred_aspects.insert(t.aspect);
      if (is_pn_polarity(t.sentiment)) pred_pn.insert(t);
    }
    detail::count_sets(gold_aspects, pred_aspects, r.acd);
    detail::count_sets(gold_pn, pred_pn, r.acsa);
  }
  for (auto& [k, s] : r.acd) s.finalize();
  for (auto& [k, s] : r.acsa) s.finalize();
  r.acd_f1_macro = detail::macro_over_gold(r.acd);
  r.acsa_f1_pn_macro = detail::macro_over_gold(r.acsa);
  return r;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  auto scores = [](const ClassScores& s) {
    return nlohmann::ordered_json{{"tp", s.tp},         {"fp", s.fp},
                                  {"fn", s.fn},         {"precision", s.precision},
                                  {"recall", s.recall}, {"f1", s.f1},
                                  {"in_gold", s.in_gold}};
  };
  nlohmann::ordered_json acd = nlohmann::ordered_json::object();
  for (const auto& [k, s] : r.acd) acd[k] = scores(s);
  nlohmann::ordered_json acsa = nlohmann::ordered_json::array();
  for (const auto& [k, s] : r.acsa) {
    auto j = scores(s);
    j["aspect"] = k.aspect;
    j["sentiment"] = k.sentiment;
    acsa.push_back(std::move(j));
  }
  return {{"sentences", r.sentences},
          {"acd_f1_macro", r.acd_f1_macro},
          {"acsa_f1_pn_macro", r.acsa_f1_pn_macro},
          {"acd_per_class", std::move(acd)},
          {"acsa_per_class", std::move(acsa)}};
}

// Comparison grid: one row per prediction file, ACD and ACSA columns in
// percent.
inline std::string format_table(std::span<const std::string> names,
                                std::span<const MetricsReport> reports) {
  std::size_t width = 6;
  for (const auto& n : names) width = std::max(width, n.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Method" << "  "
      << std::right << std::setw(8) << "ACD" << "  " << std::setw(8) << "ACSA" << '\n';
  out << std::string(width + 20, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < names.size() && i < reports.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << names[i] << "  " << std::right
        << std::setw(8) << 100.0 * reports[i].acd_f1_macro << "  " << std::setw(8)
        << 100.0 * reports[i].acsa_f1_pn_macro << '\n';
  }
  return out.str();
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t dof = 0;
};

// Paired two-sided t-test on differences a - b. Conventions for zero spread:
// all differences zero gives t = 0, p = 1; equal nonzero differences give
// t = +/-inf, p = 0.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ValidationError("paired_t_test: score lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("paired_t_test: need at least 2 pairs");
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.dof = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) return r;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.dof));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace axabsa

#endif  // AXABSA_EVALUATION_HPP_
