#include <random>

#include "doctest.h"

#include "gmp/core_types.hpp"
#include "gmp/errors.hpp"

using namespace gmp;

TEST_SUITE("core_types") {

TEST_CASE("encode_targets matches the worked example") {
  TripletSequence seq{Task::kJmasa, {{5, 5, Sentiment::kPos}, {13, 14, Sentiment::kNeu}}, false};
  CHECK(encode_targets(seq, 20) == std::vector<int>{5, 5, 21, 13, 14, 22, 0});
  CHECK(decode_targets(std::vector<int>{5, 5, 21, 13, 14, 22, 0}, 20, Task::kJmasa) == seq);
}

TEST_CASE("empty and MATE sequences") {
  CHECK(encode_targets(TripletSequence{Task::kJmasa, {}, false}, 8) == std::vector<int>{0});
  CHECK(decode_targets(std::vector<int>{0}, 8, Task::kJmasa).items.empty());
  TripletSequence mate{Task::kMate, {{2, 3, std::nullopt}, {6, 6, std::nullopt}}, false};
  CHECK(encode_targets(mate, 10) == std::vector<int>{2, 3, 6, 6, 0});
  CHECK(decode_targets(std::vector<int>{2, 3, 6, 6, 0}, 10, Task::kMate) == mate);
}

TEST_CASE("decode_targets rejects malformed sequences with a position") {
  try {
    decode_targets(std::vector<int>{3, 2, 21, 0}, 10, Task::kJmasa);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 1);
  }
  CHECK_THROWS_AS(decode_targets(std::vector<int>{3, 11, 0}, 10, Task::kJmasa), ParseError);  // sentiment as end
  CHECK_THROWS_AS(decode_targets(std::vector<int>{3, 4, 5, 0}, 10, Task::kJmasa), ParseError);  // pointer as sentiment
  CHECK_THROWS_AS(decode_targets(std::vector<int>{3, 4, 11}, 10, Task::kJmasa), ParseError);   // no EOS
  CHECK_THROWS_AS(decode_targets(std::vector<int>{3, 4, 11, 0, 0}, 10, Task::kJmasa), ParseError);
  CHECK_THROWS_AS(decode_targets(std::vector<int>{3, 0}, 10, Task::kMate), ParseError);
  CHECK_THROWS_AS(decode_targets(std::vector<int>{99, 99, 0}, 10, Task::kMate), ParseError);
}

TEST_CASE("encode_targets range errors") {
  TripletSequence bad{Task::kJmasa, {{0, 1, Sentiment::kPos}}, false};
  CHECK_THROWS_AS(encode_targets(bad, 5), RangeError);
  bad.items[0] = {2, 6, Sentiment::kPos};
  CHECK_THROWS_AS(encode_targets(bad, 5), RangeError);
}

TEST_CASE("symbol/index bijection") {
  for (int l_t = 1; l_t <= 12; ++l_t) {
    for (int i = 0; i < target_space_size(l_t); ++i) {
      CHECK(symbol_to_index(index_to_symbol(i, l_t), l_t) == i);
    }
    CHECK_THROWS_AS(index_to_symbol(target_space_size(l_t), l_t), RangeError);
    CHECK_THROWS_AS(index_to_symbol(-1, l_t), RangeError);
  }
  CHECK(index_to_symbol(0, 4) == TargetSymbol::eos());
  CHECK(index_to_symbol(7, 4) == TargetSymbol::of(Sentiment::kNeg));
}

TEST_CASE("round trip and length law on random sequences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int l_t = 5 + static_cast<int>(rng() % 60);
    const Task task = static_cast<Task>(rng() % 3);
    TripletSequence seq{task, {}, false};
    int p = 1;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n && p <= l_t; ++k) {
      const int b = p + static_cast<int>(rng() % 2);
      if (b > l_t) break;
      const int e = std::min(l_t, b + static_cast<int>(rng() % 3));
      Triplet t{b, e, std::nullopt};
      if (task_has_sentiment(task)) t.sentiment = static_cast<Sentiment>(rng() % 3);
      seq.items.push_back(t);
      p = e + 1;
    }
    const auto enc = encode_targets(seq, l_t);
    CHECK(enc.size() == seq.items.size() * (task_has_sentiment(task) ? 3 : 2) + 1);
    CHECK(decode_targets(enc, l_t, task) == seq);
  }
}

TEST_CASE("validate_instance") {
  Instance inst;
  inst.id = "a";
  inst.text_tokens = {"x", "y"};
  inst.aspects = {{1, 1}};
  inst.sentiments = {Sentiment::kPos};
  CHECK_NOTHROW(validate_instance(inst));
  CHECK(surface_term(inst, 0) == "x");
  inst.aspects = {{3, 3}};
  CHECK_THROWS_WITH_AS(validate_instance(inst), doctest::Contains("'a'"), ValidationError);
  inst.aspects = {{1, 2}, {2, 2}};
  inst.sentiments = {Sentiment::kPos, Sentiment::kNeg};
  CHECK_THROWS_AS(validate_instance(inst), ValidationError);
  inst.aspects = {{1, 1}};
  CHECK_THROWS_AS(validate_instance(inst), ValidationError);  // length mismatch
}

TEST_CASE("string conversions") {
  CHECK(to_string(Sentiment::kNeu) == "NEU");
  CHECK(sentiment_from_string("NEG") == Sentiment::kNeg);
  CHECK_THROWS_AS(sentiment_from_string("bad"), DataError);
  CHECK(task_from_string("masc") == Task::kMasc);
  CHECK_THROWS_AS(task_from_string("other"), ConfigError);
}

}
