#include "gmp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gmp/errors.hpp"
#include "gmp/triplet_generation.hpp"

namespace gmp {

EvalOutput evaluate_model(const GmpModel& model, std::span<const Instance> instances) {
  const Task task = model.config().task;
  EvalOutput out;
  for (const auto& inst : instances) {
    Prediction p = predict(model, inst);
    out.truncated += p.triplets.truncated;
    out.preds.push_back(std::move(p.triplets));
    out.golds.push_back(gold_triplets(inst, task));
    if (p.predicted_count) {
      out.pred_counts.push_back(*p.predicted_count);
      out.gold_counts.push_back(inst.aspect_count());
    }
  }
  out.report = task_metrics(task, out.preds, out.golds);
  if (!out.pred_counts.empty()) out.report.count_accuracy = count_accuracy(out.pred_counts, out.gold_counts);
  return out;
}

std::vector<nn::Matrix> snapshot(const nn::ParameterStore& store) {
  std::vector<nn::Matrix> out;
  for (const auto& p : store.all()) out.push_back(p.value);
  return out;
}

void restore(nn::ParameterStore& store, const std::vector<nn::Matrix>& values) {
  if (values.size() != store.all().size()) throw std::logic_error("snapshot does not match store");
  std::size_t i = 0;
  for (auto& p : store.all()) p.value = values[i++];
}

Trainer::Trainer(GmpModel& model)
    : model_(model), adam_(model.params()), rng_(model.config().seed ^ 0xA5A5A5A5ULL),
      dropout_rng_(model.config().seed ^ 0x5A5A5A5AULL) {}

EpochStats Trainer::train_epoch(std::span<const Instance> train) {
  const auto& cfg = model_.config();
  const auto start = std::chrono::steady_clock::now();
  EpochStats stats;
  stats.epoch = ++epoch_;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  int batches = 0;
  for (std::size_t first = 0; first < order.size(); first += batch) {
    const std::size_t last = std::min(order.size(), first + batch);
    const double weight = 1.0 / static_cast<double>(last - first);
    model_.params().zero_grad();
    for (std::size_t i = first; i < last; ++i) {
      const Instance& inst = train[order[i]];
      nn::Tape tape;
      tape.set_dropout(cfg.dropout, &dropout_rng_);
      const LossBreakdown loss = training_loss(tape, model_, inst);
      const double value = nn::scalar(loss.total);
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss " + std::to_string(value) + " on instance '" + inst.id +
                            "' in epoch " + std::to_string(epoch_));
      }
      stats.loss += value;
      stats.generation += nn::scalar(loss.generation);
      if (loss.count) stats.count += nn::scalar(*loss.count);
      tape.backward(loss.total, weight);
    }
    const double norm = model_.params().grad_norm();
    if (!std::isfinite(norm)) {
      throw TrainingError("non-finite gradient norm in epoch " + std::to_string(epoch_));
    }
    stats.grad_norm += adam_.step(cfg.effective_lr(), cfg.clip_norm, cfg.weight_decay);
    ++batches;
  }
  stats.instances = static_cast<int>(train.size());
  if (stats.instances > 0) {
    stats.loss /= stats.instances;
    stats.generation /= stats.instances;
    stats.count /= stats.instances;
  }
  if (batches > 0) stats.grad_norm /= batches;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

FitResult Trainer::fit(std::span<const Instance> train, std::span<const Instance> dev,
                       const FitOptions& options) {
  const int epochs = model_.config().epochs;
  const int every = std::max(1, options.eval_every);
  FitResult result;
  std::vector<nn::Matrix> best, last_good;
  int stale = 0;
  for (int e = 1; e <= epochs; ++e) {
    EpochStats stats;
    last_good = snapshot(model_.params());
    try {
      stats = train_epoch(train);
    } catch (const TrainingError& err) {
      result.diverged = true;
      result.error = err.what();
      if (best.empty()) best = std::move(last_good);
      break;
    }
    if (!dev.empty() && (e % every == 0 || e == epochs)) {
      stats.dev = evaluate_model(model_, dev).report;
      if (!result.best_dev || stats.dev->score() > result.best_dev->score()) {
        result.best_dev = stats.dev;
        result.best_epoch = stats.epoch;
        best = snapshot(model_.params());
        stale = 0;
      } else {
        ++stale;
      }
    }
    result.history.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
    if (options.patience > 0 && stale >= options.patience) break;
  }
  if (!best.empty()) restore(model_.params(), best);
  return result;
}

}  // namespace gmp
