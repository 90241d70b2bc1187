#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gmp/core_types.hpp"

namespace gmp {

struct MetricsReport {
  Task task = Task::kJmasa;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;                      // micro
  std::optional<double> accuracy;       // MASC
  std::optional<double> macro_f1;       // MASC, over classes with support or predictions
  std::optional<double> count_accuracy; // aspect-count subtask
  int n_instances = 0;
  std::string seed;
  std::string split;

  // The headline number used for model selection: F1, or Acc for MASC.
  double score() const { return accuracy.value_or(f1); }
  nlohmann::json to_json() const;
};

// f1 = 2PR/(P+R), 0 when P+R = 0.
double f1_score(double precision, double recall);

// Exact (begin, end, sentiment) match, duplicates removed, micro-averaged.
// Throws DataError when the lists differ in length.
MetricsReport jmasa_metrics(std::span<const TripletSequence> preds,
                            std::span<const TripletSequence> golds);
// Exact (begin, end) match; sentiments are ignored.
MetricsReport mate_metrics(std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds);

using ConfusionMatrix = std::array<std::array<int, kNumSentiments>, kNumSentiments>;  // [gold][pred]

double macro_f1(const ConfusionMatrix& confusion);

// One prediction per gold aspect, matched by position; throws DataError on a
// count or span mismatch.
MetricsReport masc_metrics(std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds);
ConfusionMatrix masc_confusion(std::span<const TripletSequence> preds,
                               std::span<const TripletSequence> golds);

// Fraction equal after clamping gold counts to 5.
double count_accuracy(std::span<const int> pred_counts, std::span<const int> gold_counts);

MetricsReport task_metrics(Task task, std::span<const TripletSequence> preds,
                           std::span<const TripletSequence> golds);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1), 0 for n < 2
  int n = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace gmp
