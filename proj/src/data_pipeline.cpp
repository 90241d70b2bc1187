#include "gmp/data_pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gmp/errors.hpp"

namespace gmp {

using nlohmann::json;

// ---- strata ------------------------------------------------------------------

StratumSignature StratumSignature::of(std::initializer_list<Sentiment> sentiments) {
  StratumSignature s;
  for (Sentiment x : sentiments) s.mask_ |= 1U << static_cast<int>(x);
  return s;
}

StratumSignature StratumSignature::from_mask(unsigned mask) {
  if (mask > 7U) throw DataError("stratum mask out of range");
  StratumSignature s;
  s.mask_ = mask;
  return s;
}

StratumSignature StratumSignature::parse(std::string_view text) {
  StratumSignature s;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find_first_of("+,", pos);
    const std::string_view part =
        text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (part.empty()) throw DataError("empty sentiment in stratum '" + std::string(text) + "'");
    s.mask_ |= 1U << static_cast<int>(sentiment_from_string(part));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return s;
}

const std::array<StratumSignature, 7>& StratumSignature::all() {
  static const std::array<StratumSignature, 7> kAll = {
      from_mask(1), from_mask(2), from_mask(4), from_mask(3), from_mask(6), from_mask(5), from_mask(7)};
  return kAll;
}

std::string StratumSignature::to_string() const {
  std::string out;
  for (Sentiment s : kAllSentiments) {
    if (!contains(s)) continue;
    if (!out.empty()) out += '+';
    out += gmp::to_string(s);
  }
  return out.empty() ? "{}" : out;
}

StratumSignature signature_of(const Instance& instance) {
  StratumSignature s;
  unsigned mask = 0;
  for (Sentiment x : instance.sentiments) mask |= 1U << static_cast<int>(x);
  return mask == 0 ? s : StratumSignature::from_mask(mask);
}

int FewShotQuota::total() const {
  int n = 0;
  for (const auto& [sig, c] : counts) n += c;
  return n;
}

int FewShotQuota::count(StratumSignature sig) const {
  auto it = counts.find(sig);
  return it == counts.end() ? 0 : it->second;
}

namespace {

FewShotQuota table_quota(std::array<int, 7> values, unsigned long long seed) {
  FewShotQuota q;
  q.seed = seed;
  for (std::size_t i = 0; i < 7; ++i) q.counts[StratumSignature::all()[i]] = values[i];
  return q;
}

}  // namespace

FewShotQuota FewShotQuota::twitter15(unsigned long long seed) {
  return table_quota({32, 64, 16, 16, 8, 2, 0}, seed);
}

FewShotQuota FewShotQuota::twitter17(unsigned long long seed) {
  return table_quota({32, 32, 16, 32, 16, 2, 2}, seed);
}

FewShotQuota FewShotQuota::parse(const std::string& spec, unsigned long long seed) {
  if (spec == "twitter15") return twitter15(seed);
  if (spec == "twitter17") return twitter17(seed);
  FewShotQuota q = table_quota({0, 0, 0, 0, 0, 0, 0}, seed);
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("quota entry '" + item + "' lacks ':'");
    StratumSignature sig;
    int count = 0;
    try {
      sig = StratumSignature::parse(item.substr(0, colon));
      count = std::stoi(item.substr(colon + 1));
    } catch (const std::exception& e) {
      throw ConfigError("bad quota entry '" + item + "': " + e.what());
    }
    if (count < 0) throw ConfigError("negative quota in '" + item + "'");
    q.counts[sig] = count;
  }
  return q;
}

std::string FewShotQuota::to_string() const {
  std::string out;
  for (const auto& sig : StratumSignature::all()) {
    if (!out.empty()) out += ',';
    out += sig.to_string() + ":" + std::to_string(count(sig));
  }
  return out;
}

FewShotDraw sample_fewshot(std::span<const Instance> instances, const FewShotQuota& quota) {
  std::map<StratumSignature, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto sig = signature_of(instances[i]);
    if (!sig.empty()) groups[sig].push_back(i);
  }
  for (const auto& [sig, count] : quota.counts) {
    const std::size_t population = groups[sig].size();
    if (static_cast<std::size_t>(count) > population) {
      throw QuotaError("stratum " + sig.to_string() + ": quota " + std::to_string(count) +
                       " exceeds population " + std::to_string(population));
    }
  }

  std::mt19937_64 rng(quota.seed);
  std::vector<bool> taken(instances.size(), false);
  FewShotDraw draw;
  for (const auto& sig : StratumSignature::all()) {
    const int want = quota.count(sig);
    if (want == 0) continue;
    std::vector<std::size_t> pool = groups[sig];
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int k = 0; k < want; ++k) {
      taken[pool[static_cast<std::size_t>(k)]] = true;
      draw.train.push_back(instances[pool[static_cast<std::size_t>(k)]]);
    }
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!taken[i]) draw.leftover.push_back(instances[i]);
  }
  return draw;
}

std::map<StratumSignature, int> stratum_histogram(std::span<const Instance> instances) {
  std::map<StratumSignature, int> h;
  for (const auto& sig : StratumSignature::all()) h[sig] = 0;
  for (const auto& inst : instances) {
    const auto sig = signature_of(inst);
    if (!sig.empty()) ++h[sig];
  }
  return h;
}

// ---- JSONL --------------------------------------------------------------------

json instance_to_json(const Instance& instance) {
  json j;
  j["id"] = instance.id;
  j["tokens"] = instance.text_tokens;
  json aspects = json::array();
  for (std::size_t k = 0; k < instance.aspects.size(); ++k) {
    aspects.push_back({{"begin", instance.aspects[k].begin},
                       {"end", instance.aspects[k].end},
                       {"sentiment", std::string(to_string(instance.sentiments[k]))}});
  }
  j["aspects"] = aspects;
  if (instance.image_feature) {
    j["image_feature"] = std::vector<double>(instance.image_feature->data(),
                                             instance.image_feature->data() +
                                                 instance.image_feature->size());
  }
  if (instance.caption_tokens) j["caption_tokens"] = *instance.caption_tokens;
  j["split"] = std::string(to_string(instance.split_tag));
  return j;
}

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  Instance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    inst.text_tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto& a : j.at("aspects")) {
      inst.aspects.push_back({a.at("begin").get<int>(), a.at("end").get<int>()});
      inst.sentiments.push_back(sentiment_from_string(a.at("sentiment").get<std::string>()));
    }
    if (j.contains("image_feature") && !j["image_feature"].is_null()) {
      const auto v = j["image_feature"].get<std::vector<double>>();
      inst.image_feature = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("caption_tokens") && !j["caption_tokens"].is_null()) {
      inst.caption_tokens = j["caption_tokens"].get<std::vector<std::string>>();
    }
    if (j.contains("split")) inst.split_tag = split_from_string(j["split"].get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(std::string("schema error: ") + e.what());
  }
  validate_instance(inst);
  return inst;
}

std::vector<Instance> parse_jsonl(std::istream& in, const std::string& source) {
  std::vector<Instance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    try {
      out.push_back(instance_from_json(j));
    } catch (const ValidationError&) {
      throw;
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Instance> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_jsonl(in, path.string());
}

void write_jsonl(const std::filesystem::path& path, std::span<const Instance> instances) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::VectorXd provide_image_feature(const Instance& instance, int d_v) {
  if (!instance.image_feature) return Eigen::VectorXd::Zero(d_v);
  if (instance.image_feature->size() != d_v) {
    throw DimensionError("instance '" + instance.id + "': image feature has dimension " +
                         std::to_string(instance.image_feature->size()) + ", expected " +
                         std::to_string(d_v));
  }
  return *instance.image_feature;
}

// ---- synthetic corpus --------------------------------------------------------------

void SyntheticCorpusConfig::validate() const {
  if (n_instances < 0) throw ConfigError("n_instances must be >= 0");
  if (max_aspects < 1 || max_aspects > kMaxAspectCount) {
    throw ConfigError("max_aspects must lie in [1, 5]");
  }
  if (min_len < 1 || max_len < min_len) throw ConfigError("invalid text length range");
  if (d_v <= 0) throw ConfigError("d_v must be positive");
  if (aspect_pool_size < 2 * max_aspects + 1) throw ConfigError("aspect pool too small");
  if (cues_per_sentiment < 1 && cue_lexicon[0].empty()) {
    throw ConfigError("cues_per_sentiment must be positive");
  }
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(cue_dropout) || !rate_ok(distractor_rate) || !rate_ok(two_token_aspect_rate)) {
    throw ConfigError("rates must lie in [0, 1]");
  }
  if (image_noise < 0.0) throw ConfigError("image_noise must be >= 0");
}

bool SyntheticLexicon::is_aspect_token(const std::string& token) const {
  return std::binary_search(aspect_pool.begin(), aspect_pool.end(), token);
}

std::optional<Sentiment> SyntheticLexicon::cue_sentiment(const std::string& token) const {
  for (Sentiment s : kAllSentiments) {
    const auto& set = cues[static_cast<std::size_t>(s)];
    if (std::find(set.begin(), set.end(), token) != set.end()) return s;
  }
  return std::nullopt;
}

SyntheticLexicon make_lexicon(const SyntheticCorpusConfig& config) {
  config.validate();
  SyntheticLexicon lex;
  const char* prefixes[] = {"pos", "neu", "neg"};
  std::set<std::string> seen;
  for (std::size_t s = 0; s < kNumSentiments; ++s) {
    if (!config.cue_lexicon[s].empty()) {
      lex.cues[s] = config.cue_lexicon[s];
    } else {
      for (int i = 0; i < config.cues_per_sentiment; ++i) {
        lex.cues[s].push_back(std::string(prefixes[s]) + std::to_string(i));
      }
    }
    for (const auto& t : lex.cues[s]) {
      if (!seen.insert(t).second) throw ConfigError("cue lexicons overlap on '" + t + "'");
    }
  }
  const int cue_total = static_cast<int>(seen.size());
  const int filler = config.vocab_size - cue_total - config.aspect_pool_size;
  if (filler < 1) {
    throw ConfigError("vocab_size " + std::to_string(config.vocab_size) +
                      " too small for disjoint cue, aspect and filler pools");
  }
  for (int i = 0; i < config.aspect_pool_size; ++i) lex.aspect_pool.push_back("asp" + std::to_string(i));
  std::sort(lex.aspect_pool.begin(), lex.aspect_pool.end());
  for (int i = 0; i < filler; ++i) lex.filler.push_back("w" + std::to_string(i));
  for (const auto& t : lex.aspect_pool) {
    if (seen.count(t)) throw ConfigError("cue lexicon collides with aspect token '" + t + "'");
  }

  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  lex.prototypes.resize(kNumSentiments, config.d_v);
  for (Eigen::Index i = 0; i < lex.prototypes.size(); ++i) lex.prototypes.data()[i] = normal(rng);
  return lex;
}

std::vector<Instance> generate_synthetic_corpus(const SyntheticCorpusConfig& config) {
  const SyntheticLexicon lex = make_lexicon(config);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // P(n = k) proportional to 2^-k; sentiments POS/NEU/NEG at 0.35/0.45/0.20.
  std::vector<double> count_weights;
  for (int k = 1; k <= config.max_aspects; ++k) count_weights.push_back(std::ldexp(1.0, -k));
  std::discrete_distribution<int> count_dist(count_weights.begin(), count_weights.end());
  std::discrete_distribution<int> sentiment_dist({0.35, 0.45, 0.20});
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };

  std::vector<Instance> corpus;
  corpus.reserve(static_cast<std::size_t>(config.n_instances));
  for (int idx = 0; idx < config.n_instances; ++idx) {
    const int n = count_dist(rng) + 1;
    struct Unit {
      std::vector<std::string> tokens;
      std::optional<Sentiment> sentiment;  // absent for distractors
      int aspect_width = 0;
    };
    std::vector<std::string> pool = lex.aspect_pool;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t next_pool = 0;
    auto cue_for = [&](Sentiment s) {
      if (unit(rng) < config.cue_dropout) return lex.blank_cue;
      return pick(lex.cues[static_cast<std::size_t>(s)]);
    };

    std::vector<Unit> units;
    for (int k = 0; k < n; ++k) {
      Unit u;
      u.sentiment = static_cast<Sentiment>(sentiment_dist(rng));
      u.aspect_width = unit(rng) < config.two_token_aspect_rate ? 2 : 1;
      for (int w = 0; w < u.aspect_width; ++w) u.tokens.push_back(pool[next_pool++]);
      u.tokens.push_back(cue_for(*u.sentiment));
      units.push_back(std::move(u));
    }
    if (unit(rng) < config.distractor_rate) {
      Unit u;
      u.tokens.push_back(pool[next_pool++]);
      u.tokens.push_back(cue_for(static_cast<Sentiment>(sentiment_dist(rng))));
      units.insert(units.begin() + static_cast<std::ptrdiff_t>(
                                       std::uniform_int_distribution<std::size_t>(0, units.size())(rng)),
                   std::move(u));
    }

    int unit_tokens = 0;
    for (const auto& u : units) unit_tokens += static_cast<int>(u.tokens.size());
    const int length =
        std::max(std::uniform_int_distribution<int>(config.min_len, config.max_len)(rng), unit_tokens);
    // Slot layout: -1 is a filler token, k >= 0 is unit k (units keep their order).
    std::vector<int> slots(static_cast<std::size_t>(length - unit_tokens), -1);
    for (std::size_t k = 0; k < units.size(); ++k) slots.push_back(0);
    std::shuffle(slots.begin(), slots.end(), rng);

    Instance inst;
    inst.id = config.id_prefix + std::to_string(idx);
    std::size_t unit_index = 0;
    std::vector<std::string> caption;
    for (int slot : slots) {
      if (slot < 0) {
        inst.text_tokens.push_back(pick(lex.filler));
        continue;
      }
      const Unit& u = units[unit_index++];
      const int begin = inst.text_length() + 1;
      for (const auto& t : u.tokens) inst.text_tokens.push_back(t);
      if (u.aspect_width > 0) {
        inst.aspects.push_back({begin, begin + u.aspect_width - 1});
        inst.sentiments.push_back(*u.sentiment);
        for (int w = 0; w < u.aspect_width; ++w) caption.push_back(u.tokens[static_cast<std::size_t>(w)]);
      }
    }
    if (config.with_caption) inst.caption_tokens = caption;
    if (config.with_image) {
      Eigen::VectorXd f = Eigen::VectorXd::Zero(config.d_v);
      for (Sentiment s : inst.sentiments) f += lex.prototypes.row(static_cast<int>(s)).transpose();
      f /= static_cast<double>(inst.sentiments.size());
      for (Eigen::Index i = 0; i < f.size(); ++i) f(i) += config.image_noise * normal(rng);
      inst.image_feature = f;
    }
    validate_instance(inst);
    corpus.push_back(std::move(inst));
  }
  return corpus;
}

TripletSequence cue_oracle(const Instance& instance, const SyntheticLexicon& lexicon, Task task) {
  std::unordered_set<std::string> caption;
  const bool use_caption = instance.caption_tokens && !instance.caption_tokens->empty();
  if (use_caption) caption.insert(instance.caption_tokens->begin(), instance.caption_tokens->end());

  std::optional<Sentiment> image_guess;
  if (instance.image_feature && instance.image_feature->size() == lexicon.prototypes.cols()) {
    Eigen::Index best = 0;
    (lexicon.prototypes.rowwise() - instance.image_feature->transpose())
        .rowwise()
        .squaredNorm()
        .minCoeff(&best);
    image_guess = static_cast<Sentiment>(best);
  }

  TripletSequence out{task, {}, false};
  const auto& toks = instance.text_tokens;
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!lexicon.is_aspect_token(toks[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool in_caption = true;
    while (j < toks.size() && lexicon.is_aspect_token(toks[j])) {
      if (use_caption && !caption.count(toks[j])) in_caption = false;
      ++j;
    }
    if (in_caption) {
      Triplet t{static_cast<int>(i) + 1, static_cast<int>(j), std::nullopt};
      if (task_has_sentiment(task)) {
        auto s = j < toks.size() ? lexicon.cue_sentiment(toks[j]) : std::nullopt;
        t.sentiment = s ? *s : image_guess.value_or(Sentiment::kNeu);
      }
      out.items.push_back(t);
    }
    i = j;
  }
  return out;
}

}  // namespace gmp
