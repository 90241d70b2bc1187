#pragma once

#include <span>

#include "gmp/multimodal_encoder.hpp"

namespace gmp {

struct PromptOptions {
  bool no_prompt = false;  // E_M only
  bool no_gap = false;     // P_a rows -> two <gap> placeholder rows
  bool no_gsp = false;     // SP row -> one <gsp> placeholder row

  static PromptOptions from(const nn::Ablations& a) { return {a.no_prompt, a.no_gap, a.no_gsp}; }
};

// Layout extends E_M with the prompt segment between /cap and bos:
//   prom, {group_k}, /prom   with group segment names suffixed by k (1-based):
//   JMASA: P_a.k (2), senti.k, SP.k     MASC: a.k, senti.k, SP.k     MATE: P_a.k (2)
struct PromptedEmbedding {
  nn::Var rows;
  LayoutMap layout;
  Task task = Task::kJmasa;
  int prompt_groups = 0;
  int length() const { return layout.total_length(); }
};

// l_J = l_i + l_cap + l_t + 4n + 9 (E_M alone under no_prompt).
inline int jmasa_length(int l_i, int l_cap, int l_t, int n) { return multimodal_length(l_i, l_cap, l_t) + 2 + 4 * n; }
inline int masc_length(int l_i, int l_cap, int l_t, int n) { return multimodal_length(l_i, l_cap, l_t) + 2 + 3 * n; }
inline int mate_length(int l_i, int l_cap, int l_t, int n) { return multimodal_length(l_i, l_cap, l_t) + 2 + 2 * n; }

// `aspect_prompts` (2n x d) is ignored under no_gap, `sentiment_prompts` (n x d)
// under no_gsp; either may then be an invalid Var. Throws DataError on arity mismatch.
PromptedEmbedding assemble_jmasa(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                 nn::Var aspect_prompts, nn::Var sentiment_prompts, int n,
                                 const PromptOptions& options);

// One group per gold span; the aspect row is the mean of the span's E_T rows.
// Throws RangeError for a span outside the text.
PromptedEmbedding assemble_masc(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                nn::Var sentiment_prompts, std::span<const AspectSpan> spans,
                                const PromptOptions& options);

// Throws ConfigError with no_gsp (undefined for MATE).
PromptedEmbedding assemble_mate(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                nn::Var aspect_prompts, int n, const PromptOptions& options);

}  // namespace gmp
