#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gmp/nstream_decoders.hpp"
#include "gmp/prompt_assembly.hpp"

namespace gmp {

// Everything the task decoder needs for one instance.
struct TaskContext {
  BaseSegments base;
  PromptBundle prompts;
  PromptedEmbedding prompted;
  nn::Var memory;         // H^P (l_X x d)
  nn::Var output_table;   // [e_eos; E_T; E_S], one row per target-space index
  nn::Var input_table;    // [e_bos; E_T; E_S], decoder input for each index (row 0 = BOS)
  int text_length() const { return base.text_length(); }
};

enum class CountSource {
  kGold,       // training: gold n (clamped to 5) sets prompt arity
  kPredicted,  // inference: argmax of the count head (5 under no_multitask)
};

// Runs the branch encoders, prompt decoders, prompt assembly and the task
// encoder. The count head runs for JMASA/MATE only.
TaskContext build_context(nn::Tape& tape, const GmpModel& model, const Instance& instance,
                          CountSource source);

nn::Var encode_prompted(nn::Tape& tape, const GmpModel& model, const PromptedEmbedding& e);

// Logits over the target space for each row of `hidden`: hidden * table^T.
nn::Var pointer_distribution(nn::Var hidden, nn::Var output_table);

// Teacher-forced mean cross-entropy over every target step, EOS included.
nn::Var generation_loss(nn::Tape& tape, const GmpModel& model, const TaskContext& ctx,
                        std::span<const int> targets);

// L = L_g + lambda * L_c.
nn::Var total_loss(nn::Var generation, nn::Var count, double lambda);

struct LossBreakdown {
  nn::Var total;
  nn::Var generation;
  std::optional<nn::Var> count;
};

// L for one instance (recording tape); L_c enters with the config's effective lambda.
LossBreakdown training_loss(nn::Tape& tape, const GmpModel& model, const Instance& instance);

// ---- constrained decoding ----------------------------------------------------

enum class Phase { kBegin, kEnd, kSentiment };

// Grammar automaton over the target space.
//   BEGIN: EOS or a pointer after the previous span's end (EOS only once 5
//          triplets exist); END: pointers >= the current begin; SENTIMENT:
//          sentiment symbols (skipped for MATE). With forced spans (MASC) the
//          begin/end symbols are fixed and EOS follows the last span.
class GenerationState {
 public:
  GenerationState(Task task, int text_length, std::span<const AspectSpan> forced = {});

  Phase phase() const { return phase_; }
  bool done() const { return done_; }
  int steps() const { return static_cast<int>(emitted_.size()); }
  const std::vector<int>& emitted() const { return emitted_; }
  int triplet_count() const { return triplets_; }

  // Allowed mask over target-space indices.
  std::vector<bool> allowed() const;
  // Highest-logit allowed index; ties go to the lowest index.
  int choose(std::span<const double> logits) const;
  // Throws std::logic_error for a disallowed symbol.
  void emit(int index);

  // Parsed prefix: every complete triplet emitted so far.
  TripletSequence result() const;

 private:
  Task task_;
  int l_t_;
  std::vector<AspectSpan> forced_;
  Phase phase_ = Phase::kBegin;
  bool done_ = false;
  int last_end_ = 0;
  int begin_ = 0;
  int triplets_ = 0;
  std::vector<int> emitted_;
};

// Logits for the next symbol given the emitted prefix.
using StepLogits = std::function<std::vector<double>(std::span<const int> prefix)>;

// Greedy grammar-constrained decoding; stops at EOS or after max_steps symbols
// (result().truncated set, complete triplets kept).
TripletSequence constrained_decode(const StepLogits& step, Task task, int text_length, int max_steps,
                                   std::span<const AspectSpan> forced = {});

struct Prediction {
  TripletSequence triplets;
  std::optional<int> predicted_count;  // JMASA/MATE
};

// Inference on a non-recording tape. max_steps <= 0 uses the decoder capacity.
Prediction predict(const GmpModel& model, const Instance& instance, int max_steps = 0);

}  // namespace gmp
