#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmp/evaluation.hpp"
#include "gmp/gmp_model.hpp"
#include "gmp/nn/optim.hpp"

namespace gmp {

struct EpochStats {
  int epoch = 0;             // 1-based
  double loss = 0.0;         // mean L over instances
  double generation = 0.0;   // mean L_g
  double count = 0.0;        // mean L_c (0 when AND is not run)
  double grad_norm = 0.0;    // mean pre-clip norm over batches
  int instances = 0;
  double seconds = 0.0;
  std::optional<MetricsReport> dev;
};

struct FitOptions {
  int eval_every = 1;  // dev evaluation period in epochs
  int patience = 0;    // stop after this many evaluations without improvement; 0 = never
  std::function<void(const EpochStats&)> on_epoch;
};

struct FitResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;  // 0: final parameters kept (no dev set)
  std::optional<MetricsReport> best_dev;
  bool diverged = false;
  std::string error;
};

struct EvalOutput {
  std::vector<TripletSequence> preds;
  std::vector<TripletSequence> golds;
  std::vector<int> pred_counts;  // JMASA/MATE only
  std::vector<int> gold_counts;
  int truncated = 0;
  MetricsReport report;
};

// Predicts every instance and scores the task metric plus count accuracy.
EvalOutput evaluate_model(const GmpModel& model, std::span<const Instance> instances);

// Mini-batch Adam over a model; batches are drawn from a seeded shuffle of the
// training set and processed sequentially, one tape per instance.
class Trainer {
 public:
  explicit Trainer(GmpModel& model);

  // Throws TrainingError on a non-finite loss or gradient.
  EpochStats train_epoch(std::span<const Instance> train);

  // Trains for config().epochs; with a non-empty dev set the parameters of the
  // best dev score are restored at the end (and after a divergence).
  FitResult fit(std::span<const Instance> train, std::span<const Instance> dev,
                const FitOptions& options = {});

  int epochs_done() const { return epoch_; }

 private:
  GmpModel& model_;
  nn::Adam adam_;
  nn::Rng rng_;
  nn::Rng dropout_rng_;
  int epoch_ = 0;
};

// Parameter values only, in store order.
std::vector<nn::Matrix> snapshot(const nn::ParameterStore& store);
void restore(nn::ParameterStore& store, const std::vector<nn::Matrix>& values);

}  // namespace gmp
