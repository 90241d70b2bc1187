#include "gmp/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gmp/errors.hpp"

namespace gmp {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join_seeds(const std::vector<unsigned long long>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

bool set_corpus(SyntheticCorpusConfig& c, const std::string& key, const std::string& v) {
  if (key == "n_train") c.n_instances = number<int>(key, v);
  else if (key == "vocab_size") c.vocab_size = number<int>(key, v);
  else if (key == "aspect_pool_size") c.aspect_pool_size = number<int>(key, v);
  else if (key == "cues_per_sentiment") c.cues_per_sentiment = number<int>(key, v);
  else if (key == "max_aspects") c.max_aspects = number<int>(key, v);
  else if (key == "min_len") c.min_len = number<int>(key, v);
  else if (key == "max_len") c.max_len = number<int>(key, v);
  else if (key == "two_token_aspect_rate") c.two_token_aspect_rate = number<double>(key, v);
  else if (key == "image_noise") c.image_noise = number<double>(key, v);
  else if (key == "cue_dropout") c.cue_dropout = number<double>(key, v);
  else if (key == "distractor_rate") c.distractor_rate = number<double>(key, v);
  else if (key == "with_caption") c.with_caption = boolean(key, v);
  else if (key == "with_image") c.with_image = boolean(key, v);
  else if (key == "seed") c.seed = number<unsigned long long>(key, v);
  else return false;
  return true;
}

}  // namespace

SweepSpec SweepSpec::parse(const std::string& text) {
  SweepSpec s;
  if (trim(text).empty() || trim(text) == "none") return s;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("sweep '" + text + "': expected name:v1,v2,...");
  s.parameter = trim(text.substr(0, colon));
  if (s.parameter != "l_i" && s.parameter != "lambda") {
    throw ConfigError("sweep parameter '" + s.parameter + "' is not one of l_i, lambda");
  }
  for (const auto& v : split(text.substr(colon + 1), ',')) s.values.push_back(number<double>("sweep", v));
  if (s.values.empty()) throw ConfigError("sweep '" + text + "' has no values");
  for (double v : s.values) {
    if (v < 0.0) throw ConfigError("sweep values must be >= 0");
    if (s.parameter == "l_i" && v != static_cast<int>(v)) throw ConfigError("l_i sweep values must be integers");
  }
  return s;
}

std::string SweepSpec::to_string() const {
  if (!enabled()) return "none";
  std::string out = parameter + ":";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt(values[i]);
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key.rfind("corpus.", 0) == 0) {
    const std::string sub = key.substr(7);
    if (sub == "n_test") {
      corpus_test = number<int>(key, v);
    } else if (!set_corpus(corpus, sub, v)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    return;
  }
  if (key == "output_dir") output_dir = v;
  else if (key == "corpus_dir") corpus_dir = v;
  else if (key == "splits_dir") splits_dir = v;
  else if (key == "experiment") experiment = v;
  else if (key == "quota") quota = v;
  else if (key == "seeds") {
    seeds.clear();
    for (const auto& s : split(v, ',')) seeds.push_back(number<unsigned long long>(key, s));
  } else if (key == "runs_per_seed") runs_per_seed = number<int>(key, v);
  else if (key == "eval_every") eval_every = number<int>(key, v);
  else if (key == "patience") patience = number<int>(key, v);
  else if (key == "sweep") sweep = SweepSpec::parse(v);
  else if (!model.set(key, v)) throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::apply_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig RunConfig::load(const fs::path& file, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    cfg.apply_text(ss.str(), file.string());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    cfg.set(trim(o.substr(0, eq)), o.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::validate() const {
  model.validate();
  SyntheticCorpusConfig c = corpus;
  c.d_v = model.d_v;
  c.validate();
  if (corpus_test < 0) throw ConfigError("corpus.n_test must be >= 0");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (runs_per_seed < 1) throw ConfigError("runs_per_seed must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  (void)FewShotQuota::parse(quota, 0);
  if (sweep.enabled() && sweep.parameter == "lambda" && model.ablations.no_multitask) {
    throw ConfigError("a lambda sweep is meaningless with no_multitask");
  }
  if (sweep.enabled() && sweep.parameter == "lambda" && model.task == Task::kMasc) {
    throw ConfigError("a lambda sweep needs the count subtask, which MASC does not run");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : model.to_map()) os << k << " = " << v << "\n";
  os << "corpus.n_train = " << corpus.n_instances << "\n"
     << "corpus.n_test = " << corpus_test << "\n"
     << "corpus.vocab_size = " << corpus.vocab_size << "\n"
     << "corpus.aspect_pool_size = " << corpus.aspect_pool_size << "\n"
     << "corpus.cues_per_sentiment = " << corpus.cues_per_sentiment << "\n"
     << "corpus.max_aspects = " << corpus.max_aspects << "\n"
     << "corpus.min_len = " << corpus.min_len << "\n"
     << "corpus.max_len = " << corpus.max_len << "\n"
     << "corpus.two_token_aspect_rate = " << fmt(corpus.two_token_aspect_rate) << "\n"
     << "corpus.image_noise = " << fmt(corpus.image_noise) << "\n"
     << "corpus.cue_dropout = " << fmt(corpus.cue_dropout) << "\n"
     << "corpus.distractor_rate = " << fmt(corpus.distractor_rate) << "\n"
     << "corpus.with_caption = " << (corpus.with_caption ? "true" : "false") << "\n"
     << "corpus.with_image = " << (corpus.with_image ? "true" : "false") << "\n"
     << "corpus.seed = " << corpus.seed << "\n"
     << "output_dir = " << output_dir.string() << "\n"
     << "corpus_dir = " << corpus_root().string() << "\n"
     << "splits_dir = " << (splits_dir.empty() ? output_dir / "splits" : splits_dir).string() << "\n"
     << "experiment = " << experiment_name() << "\n"
     << "quota = " << quota << "\n"
     << "seeds = " << join_seeds(seeds) << "\n"
     << "runs_per_seed = " << runs_per_seed << "\n"
     << "eval_every = " << eval_every << "\n"
     << "patience = " << patience << "\n"
     << "sweep = " << sweep.to_string() << "\n";
  return os.str();
}

fs::path RunConfig::corpus_root() const { return corpus_dir.empty() ? output_dir / "corpus" : corpus_dir; }
fs::path RunConfig::pool_file() const { return corpus_root() / "train.jsonl"; }
fs::path RunConfig::test_file() const { return corpus_root() / "test.jsonl"; }

fs::path RunConfig::split_dir(unsigned long long seed) const {
  return (splits_dir.empty() ? output_dir / "splits" : splits_dir) / ("seed-" + std::to_string(seed));
}

std::string RunConfig::experiment_name() const {
  if (!experiment.empty()) return experiment;
  std::string name(to_string(model.task));
  const auto& a = model.ablations;
  const std::pair<bool, const char*> flags[] = {
      {a.no_image, "no_image"},   {a.no_caption, "no_caption"}, {a.no_multitask, "no_multitask"},
      {a.no_prompt, "no_prompt"}, {a.no_gap, "no_gap"},         {a.no_gsp, "no_gsp"},
      {a.dsp, "dsp"}};
  for (const auto& [on, flag] : flags) {
    if (on) name += std::string("-") + flag;
  }
  return name;
}

fs::path RunConfig::experiment_dir() const { return output_dir / experiment_name(); }

fs::path RunConfig::run_dir(unsigned long long seed, int run) const {
  return experiment_dir() / ("seed-" + std::to_string(seed)) / ("run-" + std::to_string(run));
}

FewShotQuota RunConfig::train_quota(unsigned long long seed) const { return FewShotQuota::parse(quota, seed); }

FewShotQuota RunConfig::dev_quota(unsigned long long seed) const {
  return FewShotQuota::parse(quota, seed ^ 0xDE7DE7DE7ULL);
}

unsigned long long RunConfig::model_seed(unsigned long long seed, int run) const {
  return model.seed + 1000003ULL * seed + static_cast<unsigned long long>(run);
}

}  // namespace gmp
