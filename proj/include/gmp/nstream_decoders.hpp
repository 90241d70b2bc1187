#pragma once

#include <optional>
#include <vector>

#include "gmp/gmp_model.hpp"

namespace gmp {

// Output of the prompt generators for one instance.
struct PromptBundle {
  std::optional<nn::Var> count_logits;  // 1 x 5, absent when AND is not run
  int n_used = 1;
  std::optional<nn::Var> aspect_prompts;     // AP: 2n x d
  std::optional<nn::Var> sentiment_prompts;  // SP: n x d
};

// One AND decode step from BOS over H^a_M, then the count head: 1 x 5 logits.
nn::Var predict_aspect_count(nn::Tape& tape, const GmpModel& model, nn::Var h_aspect);

// Cross-entropy against min(n_gold, 5) - 1. Throws DataError for n_gold < 1.
nn::Var count_loss(nn::Var count_logits, int n_gold);

// argmax + 1 (ties to the smaller count).
int predicted_count(const nn::Var& count_logits);

// Two autoregressive APD steps from BOS; head k maps [h1; h2] to P_a^k (2 x d).
nn::Var generate_aspect_prompts(nn::Tape& tape, const GmpModel& model, nn::Var h_aspect, int n);

// One SPD step from BOS repeated n times; with `distinct`, n autoregressive steps.
nn::Var generate_sentiment_prompt(nn::Tape& tape, const GmpModel& model, nn::Var h_sentiment,
                                  int n, bool distinct = false);

}  // namespace gmp
