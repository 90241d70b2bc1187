#pragma once

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gmp {

// Order is fixed: it is the row order of the sentiment-label table and the
// order of sentiment slots in the target space.
enum class Sentiment : int { kPos = 0, kNeu = 1, kNeg = 2 };

inline constexpr int kNumSentiments = 3;
inline constexpr std::array<Sentiment, 3> kAllSentiments = {Sentiment::kPos, Sentiment::kNeu,
                                                            Sentiment::kNeg};

// Upper bound of the aspect-count classifier; gold counts above it are clamped.
inline constexpr int kMaxAspectCount = 5;

std::string_view to_string(Sentiment s);
Sentiment sentiment_from_string(std::string_view s);  // throws DataError

enum class Task { kJmasa, kMasc, kMate };

std::string_view to_string(Task t);
Task task_from_string(std::string_view s);  // throws ConfigError

inline bool task_has_sentiment(Task t) { return t != Task::kMate; }

enum class SplitTag { kTrain, kDev, kTest };

std::string_view to_string(SplitTag t);
SplitTag split_from_string(std::string_view s);

// 1-based, inclusive token indices into the text.
struct AspectSpan {
  int begin = 1;
  int end = 1;
  int width() const { return end - begin + 1; }
  auto operator<=>(const AspectSpan&) const = default;
};

struct Instance {
  std::string id;
  std::vector<std::string> text_tokens;
  std::optional<Eigen::VectorXd> image_feature;
  std::optional<std::vector<std::string>> caption_tokens;
  std::vector<AspectSpan> aspects;
  std::vector<Sentiment> sentiments;
  SplitTag split_tag = SplitTag::kTrain;

  int text_length() const { return static_cast<int>(text_tokens.size()); }
  int aspect_count() const { return static_cast<int>(aspects.size()); }
};

// Checks every Instance invariant; throws ValidationError naming the id.
void validate_instance(const Instance& instance);

// Tokens T[begin..end] of the k-th aspect, joined by single spaces.
std::string surface_term(const Instance& instance, std::size_t k);

struct Triplet {
  int begin = 1;
  int end = 1;
  std::optional<Sentiment> sentiment;  // absent for MATE
  auto operator<=>(const Triplet&) const = default;
};

struct TripletSequence {
  Task task = Task::kJmasa;
  std::vector<Triplet> items;
  bool truncated = false;  // set by decoding when the step budget ran out

  bool operator==(const TripletSequence& o) const { return task == o.task && items == o.items; }
};

// Gold output of an instance for a task.
TripletSequence gold_triplets(const Instance& instance, Task task);

// Target space: index 0 is EOS, 1..l_t are text pointers, l_t+1..l_t+3 are
// sentiments in kAllSentiments order.
struct TargetSymbol {
  enum class Kind { kEos, kPointer, kSentiment };
  Kind kind = Kind::kEos;
  int pointer = 0;  // valid for kPointer
  Sentiment sentiment = Sentiment::kPos;  // valid for kSentiment

  static TargetSymbol eos() { return {}; }
  static TargetSymbol at(int p) { return {Kind::kPointer, p, Sentiment::kPos}; }
  static TargetSymbol of(Sentiment s) { return {Kind::kSentiment, 0, s}; }
  bool operator==(const TargetSymbol&) const = default;
};

inline constexpr int kEosIndex = 0;

inline int target_space_size(int text_length) { return text_length + 1 + kNumSentiments; }
inline int sentiment_index(Sentiment s, int text_length) {
  return text_length + 1 + static_cast<int>(s);
}

int symbol_to_index(const TargetSymbol& symbol, int text_length);   // throws RangeError
TargetSymbol index_to_symbol(int index, int text_length);           // throws RangeError

// [b1, e1, s1, ..., bn, en, sn, EOS] (sentiment slots omitted for MATE).
std::vector<int> encode_targets(const TripletSequence& triplets, int text_length);

// Inverse of encode_targets; throws ParseError carrying the offending position.
TripletSequence decode_targets(std::span<const int> indices, int text_length, Task task);

}  // namespace gmp
