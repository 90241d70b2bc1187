#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gmp/data_pipeline.hpp"
#include "gmp/nn/model_config.hpp"

namespace gmp {

// Hyperparameter sweep for `eval --sweep`: "l_i:0,1,2" or "lambda:0,0.1,0.5".
struct SweepSpec {
  std::string parameter;  // empty: no sweep
  std::vector<double> values;

  bool enabled() const { return !parameter.empty(); }
  static SweepSpec parse(const std::string& text);  // throws ConfigError
  std::string to_string() const;
};

// Everything a CLI invocation needs. Text form is one `key = value` per line;
// '#' starts a comment. Model keys are those of nn::ModelConfig, corpus keys
// carry a `corpus.` prefix.
struct RunConfig {
  RunConfig() { corpus.n_instances = 2000; }

  nn::ModelConfig model;
  SyntheticCorpusConfig corpus;
  int corpus_test = 200;  // held-out test instances written next to the pool

  std::filesystem::path output_dir = "runs";
  std::filesystem::path corpus_dir;  // default <output_dir>/corpus
  std::filesystem::path splits_dir;  // default <output_dir>/splits
  std::string experiment;            // default: task name plus ablation flags

  std::string quota = "twitter15";
  std::vector<unsigned long long> seeds{42, 87, 100};
  int runs_per_seed = 3;
  int eval_every = 1;
  int patience = 0;
  SweepSpec sweep;

  // Throws ConfigError for an unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  // Parses `key = value` lines; `source` prefixes error messages.
  void apply_text(const std::string& text, const std::string& source);
  // Config file (optional, empty path skips) followed by "key=value" overrides.
  static RunConfig load(const std::filesystem::path& file, const std::vector<std::string>& overrides);

  // Model, corpus, quota and ablation/task compatibility. Throws ConfigError.
  void validate() const;
  std::string to_text() const;

  Task task() const { return model.task; }
  std::filesystem::path corpus_root() const;
  std::filesystem::path pool_file() const;  // few-shot population
  std::filesystem::path test_file() const;
  std::filesystem::path split_dir(unsigned long long seed) const;
  std::filesystem::path experiment_dir() const;
  std::filesystem::path run_dir(unsigned long long seed, int run) const;
  std::string experiment_name() const;

  FewShotQuota train_quota(unsigned long long seed) const;
  // Dev draw uses the same quota with a derived seed.
  FewShotQuota dev_quota(unsigned long long seed) const;
  // Model initialisation seed of run `run` (1-based) on split `seed`.
  unsigned long long model_seed(unsigned long long seed, int run) const;
};

}  // namespace gmp
