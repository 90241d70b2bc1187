#include "gmp/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gmp/errors.hpp"
#include "gmp/gmp_model.hpp"
#include "gmp/training.hpp"

namespace gmp {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

SyntheticCorpusConfig corpus_config(const RunConfig& config) {
  SyntheticCorpusConfig c = config.corpus;
  c.d_v = config.model.d_v;
  return c;
}

// One line of the Table-1 style report: "A/B" per stratum, then the total.
std::string histogram_row(const std::string& label, const std::map<StratumSignature, int>& drawn,
                          const std::map<StratumSignature, int>* population) {
  std::ostringstream os;
  os << std::left << std::setw(18) << label;
  int total = 0, total_pop = 0;
  for (const auto& sig : StratumSignature::all()) {
    const auto it = drawn.find(sig);
    const int a = it == drawn.end() ? 0 : it->second;
    total += a;
    std::string cell = std::to_string(a);
    if (population) {
      const auto pt = population->find(sig);
      const int b = pt == population->end() ? 0 : pt->second;
      total_pop += b;
      cell += "/" + std::to_string(b);
    }
    os << std::setw(14) << cell;
  }
  os << (population ? std::to_string(total) + "/" + std::to_string(total_pop) : std::to_string(total));
  return os.str();
}

std::string histogram_header() {
  std::ostringstream os;
  os << std::left << std::setw(18) << "split";
  for (const auto& sig : StratumSignature::all()) os << std::setw(14) << sig.to_string();
  os << "All";
  return os.str();
}

std::vector<Instance> load_split(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing split file " + path.string() + " (run `sample` first)");
  return load_jsonl(path);
}

// Vocabulary of the whole population text: the few-shot labels are never
// consulted, so this plays the role of a pretrained tokenizer's vocabulary.
nn::Vocab population_vocab(const RunConfig& config) {
  if (!fs::exists(config.pool_file())) {
    throw IoError("missing corpus file " + config.pool_file().string() + " (run `gencorpus` first)");
  }
  return nn::Vocab::build(load_jsonl(config.pool_file()));
}

fs::path checkpoint_path(const RunConfig& config, unsigned long long seed, int run) {
  return config.run_dir(seed, run) / "model.ckpt";
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

}  // namespace

void cmd_gencorpus(const RunConfig& config, std::ostream& out) {
  config.validate();
  SyntheticCorpusConfig c = corpus_config(config);
  const int n_pool = c.n_instances;
  c.n_instances = n_pool + config.corpus_test;
  std::vector<Instance> all = generate_synthetic_corpus(c);
  std::vector<Instance> pool(all.begin(), all.begin() + n_pool);
  std::vector<Instance> test(all.begin() + n_pool, all.end());
  for (auto& inst : test) inst.split_tag = SplitTag::kTest;

  write_jsonl(config.pool_file(), pool);
  write_jsonl(config.test_file(), test);

  std::ostringstream report;
  report << histogram_header() << "\n"
         << histogram_row("population", stratum_histogram(pool), nullptr) << "\n"
         << histogram_row("test", stratum_histogram(test), nullptr) << "\n";
  write_text(config.corpus_root() / "stats.txt", report.str());
  out << "wrote " << pool.size() << " population and " << test.size() << " test instances to "
      << config.corpus_root().string() << "\n"
      << report.str();
}

void cmd_sample(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (!fs::exists(config.pool_file())) {
    throw IoError("missing corpus file " + config.pool_file().string() + " (run `gencorpus` first)");
  }
  const std::vector<Instance> pool = load_jsonl(config.pool_file());
  const auto pool_hist = stratum_histogram(pool);
  std::optional<std::map<StratumSignature, int>> test_hist;
  if (fs::exists(config.test_file())) test_hist = stratum_histogram(load_jsonl(config.test_file()));

  std::ostringstream report;
  report << "quota " << config.train_quota(0).to_string() << "\n" << histogram_header() << "\n";
  for (unsigned long long seed : config.seeds) {
    FewShotDraw train = sample_fewshot(pool, config.train_quota(seed));
    const auto leftover_hist = stratum_histogram(train.leftover);
    FewShotDraw dev = sample_fewshot(train.leftover, config.dev_quota(seed));
    for (auto& inst : train.train) inst.split_tag = SplitTag::kTrain;
    for (auto& inst : dev.train) inst.split_tag = SplitTag::kDev;

    const fs::path dir = config.split_dir(seed);
    write_jsonl(dir / "train.jsonl", train.train);
    write_jsonl(dir / "dev.jsonl", dev.train);

    const std::string tag = "seed " + std::to_string(seed);
    report << histogram_row(tag + " train", stratum_histogram(train.train), &pool_hist) << "\n"
           << histogram_row(tag + " dev", stratum_histogram(dev.train), &leftover_hist) << "\n";
  }
  if (test_hist) report << histogram_row("test", *test_hist, nullptr) << "\n";
  const fs::path report_path =
      (config.splits_dir.empty() ? config.output_dir / "splits" : config.splits_dir) / "report.txt";
  write_text(report_path, report.str());
  out << report.str();
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate();
  const nn::Vocab vocab = population_vocab(config);
  write_text(config.experiment_dir() / "config.txt", config.to_text());

  for (unsigned long long seed : config.seeds) {
    const fs::path split = config.split_dir(seed);
    const std::vector<Instance> train = load_split(split / "train.jsonl");
    const std::vector<Instance> dev = load_split(split / "dev.jsonl");
    for (int run = 1; run <= config.runs_per_seed; ++run) {
      nn::ModelConfig mc = config.model;
      mc.seed = config.model_seed(seed, run);
      GmpModel model(mc, vocab);
      Trainer trainer(model);

      const fs::path dir = config.run_dir(seed, run);
      fs::create_directories(dir);
      std::ofstream log(dir / "train_log.tsv");
      if (!log) throw IoError("cannot write " + (dir / "train_log.tsv").string());
      log << "epoch\tL\tL_g\tL_c\tgrad_norm\tseconds\tdev_score\n";
      log << std::setprecision(10);

      FitOptions options;
      options.eval_every = config.eval_every;
      options.patience = config.patience;
      options.on_epoch = [&](const EpochStats& s) {
        log << s.epoch << '\t' << s.loss << '\t' << s.generation << '\t' << s.count << '\t'
            << s.grad_norm << '\t' << s.seconds << '\t'
            << (s.dev ? std::to_string(s.dev->score()) : std::string("-")) << '\n';
        log.flush();
      };
      const FitResult result = trainer.fit(train, dev, options);
      save_model(dir / "model.ckpt", model);

      nlohmann::json summary;
      summary["seed"] = seed;
      summary["run"] = run;
      summary["model_seed"] = mc.seed;
      summary["epochs_run"] = trainer.epochs_done();
      summary["best_epoch"] = result.best_epoch;
      summary["best_dev"] = result.best_dev ? result.best_dev->to_json() : nlohmann::json(nullptr);
      summary["diverged"] = result.diverged;
      if (result.diverged) summary["error"] = result.error;
      write_text(dir / "run.json", summary.dump(2) + "\n");

      out << "seed " << seed << " run " << run << ": " << trainer.epochs_done() << " epochs, best dev "
          << (result.best_dev ? fmt_opt(result.best_dev->score()) : std::string("-")) << " at epoch "
          << result.best_epoch << "\n";
      if (result.diverged) {
        throw TrainingError("seed " + std::to_string(seed) + " run " + std::to_string(run) +
                            " diverged (" + result.error + "); last-good checkpoint kept at " +
                            (dir / "model.ckpt").string());
      }
    }
  }
}

std::vector<MetricSummary> aggregate(const std::vector<RunMetrics>& runs) {
  using Getter = std::optional<double> (*)(const MetricsReport&);
  const std::pair<const char*, Getter> metrics[] = {
      {"P", [](const MetricsReport& r) -> std::optional<double> { return r.precision; }},
      {"R", [](const MetricsReport& r) -> std::optional<double> { return r.recall; }},
      {"F1", [](const MetricsReport& r) -> std::optional<double> { return r.f1; }},
      {"Acc", [](const MetricsReport& r) { return r.accuracy; }},
      {"macro_F1", [](const MetricsReport& r) { return r.macro_f1; }},
      {"count_accuracy", [](const MetricsReport& r) { return r.count_accuracy; }},
  };
  std::vector<MetricSummary> out;
  for (const auto& [name, get] : metrics) {
    std::vector<double> values;
    for (const auto& r : runs) {
      if (auto v = get(r.report)) values.push_back(*v);
    }
    if (!values.empty() && values.size() == runs.size()) out.push_back({name, summarize(values)});
  }
  return out;
}

nlohmann::json aggregate_json(const RunConfig& config, const std::vector<RunMetrics>& runs) {
  nlohmann::json j;
  j["task"] = std::string(to_string(config.task()));
  j["experiment"] = config.experiment_name();
  j["n_runs"] = runs.size();
  for (const auto& m : aggregate(runs)) {
    j["mean"][m.name] = m.summary.mean;
    j["sd"][m.name] = m.summary.sd;
  }
  for (const auto& r : runs) {
    nlohmann::json rj = r.report.to_json();
    rj["run"] = r.run;
    j["runs"].push_back(rj);
  }
  return j;
}

void print_table(std::ostream& out, const std::vector<MetricSummary>& summary, int runs) {
  out << std::left << std::setw(16) << "metric" << "mean +- sd (" << runs << " runs)\n";
  for (const auto& m : summary) {
    out << std::left << std::setw(16) << m.name << std::fixed << std::setprecision(2)
        << 100.0 * m.summary.mean << " +- " << 100.0 * m.summary.sd << "\n";
  }
  out.unsetf(std::ios::fixed);
}

std::vector<RunMetrics> evaluate_runs(const RunConfig& config, std::ostream& out) {
  if (!fs::exists(config.test_file())) {
    throw IoError("missing test file " + config.test_file().string() + " (run `gencorpus` first)");
  }
  const std::vector<Instance> test = load_jsonl(config.test_file());
  std::vector<RunMetrics> runs;
  for (unsigned long long seed : config.seeds) {
    for (int run = 1; run <= config.runs_per_seed; ++run) {
      const fs::path ckpt = checkpoint_path(config, seed, run);
      if (!fs::exists(ckpt)) throw IoError("missing checkpoint " + ckpt.string() + " (run `train` first)");
      const std::unique_ptr<GmpModel> model = load_model(ckpt);
      if (model->config().task != config.task()) {
        throw ConfigError("checkpoint " + ckpt.string() + " was trained for " +
                          std::string(to_string(model->config().task)));
      }
      EvalOutput ev = evaluate_model(*model, test);
      ev.report.seed = std::to_string(seed);
      ev.report.split = "test";
      write_text(config.run_dir(seed, run) / "metrics.json", ev.report.to_json().dump(2) + "\n");
      out << "seed " << seed << " run " << run << ": " << to_string(config.task()) << " score "
          << fmt_opt(ev.report.score()) << " count_acc " << fmt_opt(ev.report.count_accuracy) << "\n";
      runs.push_back({seed, run, ev.report});
    }
  }
  return runs;
}

namespace {

void run_sweep(const RunConfig& config, std::ostream& out) {
  const std::string& param = config.sweep.parameter;
  std::ostringstream csv;
  csv << param << ",seed,run,P,R,F1,Acc,count_accuracy\n";
  for (double value : config.sweep.values) {
    RunConfig c = config;
    c.sweep = {};
    std::ostringstream v;
    v << value;
    c.experiment = (fs::path(config.experiment_name()) / ("sweep-" + param + "-" + v.str())).string();
    c.set(param, param == "l_i" ? std::to_string(static_cast<int>(value)) : v.str());
    out << "== " << param << " = " << v.str() << "\n";
    cmd_train(c, out);
    for (const auto& r : evaluate_runs(c, out)) {
      csv << v.str() << ',' << r.seed << ',' << r.run << ',' << std::setprecision(10) << r.report.precision
          << ',' << r.report.recall << ',' << r.report.f1 << ','
          << (r.report.accuracy ? std::to_string(*r.report.accuracy) : "") << ','
          << (r.report.count_accuracy ? std::to_string(*r.report.count_accuracy) : "") << '\n';
    }
  }
  const fs::path path = config.experiment_dir() / ("sweep_" + param + ".csv");
  write_text(path, csv.str());
  out << "wrote " << path.string() << "\n";
}

}  // namespace

void cmd_eval(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.sweep.enabled()) {
    run_sweep(config, out);
    return;
  }
  const std::vector<RunMetrics> runs = evaluate_runs(config, out);
  write_text(config.experiment_dir() / "summary.json", aggregate_json(config, runs).dump(2) + "\n");
  print_table(out, aggregate(runs), static_cast<int>(runs.size()));
}

}  // namespace gmp
