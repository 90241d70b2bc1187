#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gmp/core_types.hpp"

namespace gmp {

// Set of distinct sentiments present in an instance (bit i = Sentiment i).
class StratumSignature {
 public:
  constexpr StratumSignature() = default;
  static StratumSignature of(std::initializer_list<Sentiment> sentiments);
  static StratumSignature from_mask(unsigned mask);
  // "POS", "NEU+NEG", ... (order-insensitive, '+' or ',' separated).
  static StratumSignature parse(std::string_view text);
  // The 7 non-empty subsets in Table order: POS, NEU, NEG, POS+NEU, NEU+NEG, POS+NEG, POS+NEU+NEG.
  static const std::array<StratumSignature, 7>& all();

  bool empty() const { return mask_ == 0; }
  bool contains(Sentiment s) const { return (mask_ >> static_cast<int>(s)) & 1U; }
  unsigned mask() const { return mask_; }
  std::string to_string() const;

  auto operator<=>(const StratumSignature&) const = default;

 private:
  unsigned mask_ = 0;
};

StratumSignature signature_of(const Instance& instance);

struct FewShotQuota {
  std::map<StratumSignature, int> counts;
  unsigned long long seed = 42;

  int total() const;
  int count(StratumSignature sig) const;

  static FewShotQuota twitter15(unsigned long long seed);
  static FewShotQuota twitter17(unsigned long long seed);
  // "twitter15", "twitter17", or "POS:32,NEU:64,NEU+NEG:8,..." (missing strata are 0).
  static FewShotQuota parse(const std::string& spec, unsigned long long seed);
  std::string to_string() const;
};

struct FewShotDraw {
  std::vector<Instance> train;     // grouped by stratum in Table order
  std::vector<Instance> leftover;  // input order preserved
};

// Uniform draw without replacement per stratum; deterministic given the seed.
// Throws QuotaError naming the first stratum whose population is too small.
FewShotDraw sample_fewshot(std::span<const Instance> instances, const FewShotQuota& quota);

// Stratum histogram in Table order (instances without aspects are not counted).
std::map<StratumSignature, int> stratum_histogram(std::span<const Instance> instances);

// ---- JSONL ---------------------------------------------------------------

nlohmann::json instance_to_json(const Instance& instance);
// Throws DataError on a schema problem and ValidationError on an invariant violation.
Instance instance_from_json(const nlohmann::json& j);

std::vector<Instance> parse_jsonl(std::istream& in, const std::string& source);
std::vector<Instance> load_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const Instance> instances);

// Stored feature, or zeros of length d_v when absent.
Eigen::VectorXd provide_image_feature(const Instance& instance, int d_v);

// ---- synthetic corpus ------------------------------------------------------

struct SyntheticCorpusConfig {
  int n_instances = 500;
  int vocab_size = 400;           // word types across cue, aspect and filler pools
  int aspect_pool_size = 120;
  int cues_per_sentiment = 8;
  // Explicit cue lexicons in Sentiment order; generated names are used when empty.
  std::array<std::vector<std::string>, kNumSentiments> cue_lexicon;
  int max_aspects = 3;            // <= 5
  int min_len = 8;
  int max_len = 16;
  double two_token_aspect_rate = 0.3;
  int d_v = 128;
  double image_noise = 0.1;
  double cue_dropout = 0.0;       // probability a cue is replaced by the blank cue
  double distractor_rate = 0.0;   // probability of an unlabeled aspect-pool token with a cue
  bool with_caption = true;
  bool with_image = true;
  unsigned long long seed = 7;
  std::string id_prefix = "syn";

  void validate() const;  // throws ConfigError
};

struct SyntheticLexicon {
  std::array<std::vector<std::string>, kNumSentiments> cues;
  std::vector<std::string> aspect_pool;
  std::vector<std::string> filler;
  std::string blank_cue = "cue_blank";
  Eigen::MatrixXd prototypes;  // kNumSentiments x d_v image prototypes

  bool is_aspect_token(const std::string& token) const;
  std::optional<Sentiment> cue_sentiment(const std::string& token) const;
};

SyntheticLexicon make_lexicon(const SyntheticCorpusConfig& config);

// Every aspect is a run of aspect-pool tokens immediately followed by a cue
// token of its sentiment. The image feature is the mean prototype of the
// aspect sentiments plus noise; the caption lists the aspect tokens.
std::vector<Instance> generate_synthetic_corpus(const SyntheticCorpusConfig& config);

// Rule-based reader of the synthetic grammar: runs of aspect-pool tokens
// (restricted to caption tokens when a caption is present), sentiment from
// the following cue, falling back to the nearest image prototype.
TripletSequence cue_oracle(const Instance& instance, const SyntheticLexicon& lexicon, Task task);

}  // namespace gmp
