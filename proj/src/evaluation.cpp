#include "gmp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "gmp/errors.hpp"

namespace gmp {

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["task"] = std::string(to_string(task));
  j["seed"] = seed;
  j["split"] = split;
  j["P"] = precision;
  j["R"] = recall;
  j["F1"] = f1;
  j["Acc"] = accuracy ? nlohmann::json(*accuracy) : nlohmann::json(nullptr);
  if (macro_f1) j["macro_F1"] = *macro_f1;
  j["count_accuracy"] = count_accuracy ? nlohmann::json(*count_accuracy) : nlohmann::json(nullptr);
  j["n_instances"] = n_instances;
  return j;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DataError("metrics: " + std::to_string(a) + " predictions for " + std::to_string(b) +
                    " gold instances");
  }
}

template <typename Key>
MetricsReport span_metrics(Task task, std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds, Key key) {
  check_aligned(preds.size(), golds.size());
  using K = decltype(key(Triplet{}));
  long tp = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::set<K> p, g;
    for (const auto& t : preds[i].items) p.insert(key(t));
    for (const auto& t : golds[i].items) g.insert(key(t));
    n_pred += static_cast<long>(p.size());
    n_gold += static_cast<long>(g.size());
    for (const auto& k : p) tp += static_cast<long>(g.count(k));
  }
  MetricsReport r;
  r.task = task;
  r.precision = n_pred > 0 ? static_cast<double>(tp) / static_cast<double>(n_pred) : 0.0;
  r.recall = n_gold > 0 ? static_cast<double>(tp) / static_cast<double>(n_gold) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  r.n_instances = static_cast<int>(preds.size());
  return r;
}

}  // namespace

MetricsReport jmasa_metrics(std::span<const TripletSequence> preds,
                            std::span<const TripletSequence> golds) {
  return span_metrics(Task::kJmasa, preds, golds, [](const Triplet& t) { return t; });
}

MetricsReport mate_metrics(std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds) {
  return span_metrics(Task::kMate, preds, golds,
                      [](const Triplet& t) { return std::pair(t.begin, t.end); });
}

double macro_f1(const ConfusionMatrix& c) {
  double sum = 0.0;
  int classes = 0;
  for (int k = 0; k < kNumSentiments; ++k) {
    int support = 0, predicted = 0;
    for (int j = 0; j < kNumSentiments; ++j) {
      support += c[k][j];
      predicted += c[j][k];
    }
    if (support == 0 && predicted == 0) continue;
    const double p = predicted > 0 ? static_cast<double>(c[k][k]) / predicted : 0.0;
    const double r = support > 0 ? static_cast<double>(c[k][k]) / support : 0.0;
    sum += f1_score(p, r);
    ++classes;
  }
  return classes > 0 ? sum / classes : 0.0;
}

ConfusionMatrix masc_confusion(std::span<const TripletSequence> preds,
                               std::span<const TripletSequence> golds) {
  check_aligned(preds.size(), golds.size());
  ConfusionMatrix c{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i].items;
    const auto& g = golds[i].items;
    if (p.size() != g.size()) {
      throw DataError("MASC instance " + std::to_string(i) + ": " + std::to_string(p.size()) +
                      " predictions for " + std::to_string(g.size()) + " aspects");
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k].begin != g[k].begin || p[k].end != g[k].end) {
        throw DataError("MASC instance " + std::to_string(i) + ": predicted span differs from the given span");
      }
      if (!p[k].sentiment || !g[k].sentiment) throw DataError("MASC item without a sentiment");
      ++c[static_cast<std::size_t>(*g[k].sentiment)][static_cast<std::size_t>(*p[k].sentiment)];
    }
  }
  return c;
}

MetricsReport masc_metrics(std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds) {
  const ConfusionMatrix c = masc_confusion(preds, golds);
  long correct = 0, total = 0;
  for (int k = 0; k < kNumSentiments; ++k) {
    for (int j = 0; j < kNumSentiments; ++j) total += c[k][j];
    correct += c[k][k];
  }
  MetricsReport r;
  r.task = Task::kMasc;
  const double acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  r.accuracy = acc;
  r.precision = r.recall = r.f1 = acc;  // single label per item: micro P = R = F1 = Acc
  r.macro_f1 = macro_f1(c);
  r.n_instances = static_cast<int>(preds.size());
  return r;
}

double count_accuracy(std::span<const int> pred_counts, std::span<const int> gold_counts) {
  check_aligned(pred_counts.size(), gold_counts.size());
  if (pred_counts.empty()) return 0.0;
  long hits = 0;
  for (std::size_t i = 0; i < pred_counts.size(); ++i) {
    hits += pred_counts[i] == std::min(gold_counts[i], kMaxAspectCount);
  }
  return static_cast<double>(hits) / static_cast<double>(pred_counts.size());
}

MetricsReport task_metrics(Task task, std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds) {
  switch (task) {
    case Task::kJmasa: return jmasa_metrics(preds, golds);
    case Task::kMate: return mate_metrics(preds, golds);
    case Task::kMasc: return masc_metrics(preds, golds);
  }
  throw std::logic_error("unknown task");
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

}  // namespace gmp
