#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmp/evaluation.hpp"
#include "gmp/run_config.hpp"

namespace gmp {

// The four CLI subcommands. Each validates the config before touching any
// file, writes its artifacts under the config's directories and a
// human-readable report to `out`. Errors propagate as gmp::Error.

// <corpus>/train.jsonl (few-shot population), <corpus>/test.jsonl, <corpus>/stats.txt.
void cmd_gencorpus(const RunConfig& config, std::ostream& out);

// <splits>/seed-S/{train,dev}.jsonl per seed plus <splits>/report.txt.
void cmd_sample(const RunConfig& config, std::ostream& out);

// <experiment>/seed-S/run-R/{model.ckpt, train_log.tsv, run.json} for every
// (seed, run). Throws TrainingError after saving the last-good checkpoint when
// a run diverges.
void cmd_train(const RunConfig& config, std::ostream& out);

struct RunMetrics {
  unsigned long long seed = 0;
  int run = 0;
  MetricsReport report;
};

struct MetricSummary {
  std::string name;
  Summary summary;
};

// Mean +- sd of every reported metric over the runs.
std::vector<MetricSummary> aggregate(const std::vector<RunMetrics>& runs);
nlohmann::json aggregate_json(const RunConfig& config, const std::vector<RunMetrics>& runs);
void print_table(std::ostream& out, const std::vector<MetricSummary>& summary, int runs);

// Per-run metrics.json, <experiment>/summary.json and a table. With a sweep,
// trains and evaluates every value instead and writes <experiment>/sweep_<p>.csv.
void cmd_eval(const RunConfig& config, std::ostream& out);

// Evaluates every (seed, run) checkpoint of the experiment on the test file.
std::vector<RunMetrics> evaluate_runs(const RunConfig& config, std::ostream& out);

}  // namespace gmp
