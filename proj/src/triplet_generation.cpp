#include "gmp/triplet_generation.hpp"

#include <algorithm>
#include <stdexcept>

#include "gmp/errors.hpp"

namespace gmp {

TaskContext build_context(nn::Tape& tape, const GmpModel& model, const Instance& instance,
                          CountSource source) {
  const auto& cfg = model.config();
  const auto& ab = cfg.ablations;
  const Task task = cfg.task;
  const PromptOptions options = PromptOptions::from(ab);

  TaskContext ctx;
  ctx.base = embed_instance(tape, model, instance);
  const MultimodalEmbedding em = assemble_multimodal(tape, model, ctx.base);

  const int gold_n = instance.aspect_count();
  const bool need_count = task != Task::kMasc && !ab.no_multitask;
  const bool need_ap = task != Task::kMasc && !ab.no_prompt && !ab.no_gap;
  const bool need_sp = task != Task::kMate && !ab.no_prompt && !ab.no_gsp;

  nn::Var h_aspect;
  if (need_count || need_ap) h_aspect = encode_aspect_branch(tape, model, em);
  if (need_count) ctx.prompts.count_logits = predict_aspect_count(tape, model, h_aspect);

  int n = 0;
  if (task == Task::kMasc) {
    n = gold_n;
  } else if (source == CountSource::kGold) {
    if (gold_n < 1) throw DataError("instance '" + instance.id + "' has no aspects to train on");
    n = std::min(gold_n, kMaxAspectCount);
  } else {
    n = ab.no_multitask ? kMaxAspectCount : predicted_count(*ctx.prompts.count_logits);
  }
  ctx.prompts.n_used = n;

  if (need_ap) ctx.prompts.aspect_prompts = generate_aspect_prompts(tape, model, h_aspect, n);
  if (need_sp && n > 0) {
    nn::Var h_sentiment = encode_sentiment_branch(tape, model, em);
    ctx.prompts.sentiment_prompts = generate_sentiment_prompt(tape, model, h_sentiment, n, ab.dsp);
  }

  const nn::Var ap = ctx.prompts.aspect_prompts.value_or(nn::Var{});
  const nn::Var sp = ctx.prompts.sentiment_prompts.value_or(nn::Var{});
  switch (task) {
    case Task::kJmasa:
      ctx.prompted = assemble_jmasa(tape, model, ctx.base, ap, sp, n, options);
      break;
    case Task::kMate:
      ctx.prompted = assemble_mate(tape, model, ctx.base, ap, n, options);
      break;
    case Task::kMasc:
      ctx.prompted = assemble_masc(tape, model, ctx.base, sp, instance.aspects, options);
      break;
  }
  ctx.memory = encode_prompted(tape, model, ctx.prompted);

  const nn::Var e_s = model.sentiment_table(tape);
  const std::vector<nn::Var> out_rows{model.special_row(tape, nn::Special::kEos), ctx.base.text, e_s};
  const std::vector<nn::Var> in_rows{model.special_row(tape, nn::Special::kBos), ctx.base.text, e_s};
  ctx.output_table = nn::concat_rows(out_rows);
  ctx.input_table = nn::concat_rows(in_rows);
  return ctx;
}

nn::Var encode_prompted(nn::Tape& tape, const GmpModel& model, const PromptedEmbedding& e) {
  return model.task_encoder().encode(tape, e.rows, model.encoder_positions(e.length()));
}

nn::Var pointer_distribution(nn::Var hidden, nn::Var output_table) {
  return nn::matmul_nt(hidden, output_table);
}

nn::Var generation_loss(nn::Tape& tape, const GmpModel& model, const TaskContext& ctx,
                        std::span<const int> targets) {
  if (targets.empty() || targets.back() != kEosIndex) {
    throw DataError("gold target sequence must end with EOS");
  }
  std::vector<int> prefix{0};
  prefix.insert(prefix.end(), targets.begin(), targets.end() - 1);
  nn::Var inputs = nn::gather_rows(ctx.input_table, prefix);
  nn::Var hidden = model.task_decoder().decode(tape, ctx.memory, inputs);
  return nn::cross_entropy(pointer_distribution(hidden, ctx.output_table), targets);
}

nn::Var total_loss(nn::Var generation, nn::Var count, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  return nn::add_scaled(generation, count, lambda);
}

LossBreakdown training_loss(nn::Tape& tape, const GmpModel& model, const Instance& instance) {
  const auto& cfg = model.config();
  const TaskContext ctx = build_context(tape, model, instance, CountSource::kGold);
  const std::vector<int> targets =
      encode_targets(gold_triplets(instance, cfg.task), instance.text_length());
  LossBreakdown out;
  out.generation = generation_loss(tape, model, ctx, targets);
  if (ctx.prompts.count_logits) {
    out.count = count_loss(*ctx.prompts.count_logits, instance.aspect_count());
    out.total = total_loss(out.generation, *out.count, cfg.effective_lambda());
  } else {
    out.total = out.generation;
  }
  return out;
}

// ---- constrained decoding ----------------------------------------------------

GenerationState::GenerationState(Task task, int text_length, std::span<const AspectSpan> forced)
    : task_(task), l_t_(text_length) {
  if (text_length < 1) throw RangeError("text length must be >= 1");
  if (task == Task::kMasc) forced_.assign(forced.begin(), forced.end());
}

std::vector<bool> GenerationState::allowed() const {
  std::vector<bool> mask(static_cast<std::size_t>(target_space_size(l_t_)), false);
  if (done_) return mask;
  const bool forcing = task_ == Task::kMasc;
  switch (phase_) {
    case Phase::kBegin:
      if (forcing) {
        if (triplets_ < static_cast<int>(forced_.size())) {
          mask[static_cast<std::size_t>(forced_[static_cast<std::size_t>(triplets_)].begin)] = true;
        } else {
          mask[kEosIndex] = true;
        }
      } else {
        mask[kEosIndex] = true;
        if (triplets_ < kMaxAspectCount) {
          for (int p = last_end_ + 1; p <= l_t_; ++p) mask[static_cast<std::size_t>(p)] = true;
        }
      }
      break;
    case Phase::kEnd:
      if (forcing) {
        mask[static_cast<std::size_t>(forced_[static_cast<std::size_t>(triplets_)].end)] = true;
      } else {
        for (int p = begin_; p <= l_t_; ++p) mask[static_cast<std::size_t>(p)] = true;
      }
      break;
    case Phase::kSentiment:
      for (Sentiment s : kAllSentiments) mask[static_cast<std::size_t>(sentiment_index(s, l_t_))] = true;
      break;
  }
  return mask;
}

int GenerationState::choose(std::span<const double> logits) const {
  const auto mask = allowed();
  if (logits.size() != mask.size()) {
    throw DimensionError("expected " + std::to_string(mask.size()) + " logits, got " +
                         std::to_string(logits.size()));
  }
  int best = -1;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || logits[i] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  if (best < 0) throw std::logic_error("decoding already finished");
  return best;
}

void GenerationState::emit(int index) {
  const auto mask = allowed();
  if (index < 0 || index >= static_cast<int>(mask.size()) || !mask[static_cast<std::size_t>(index)]) {
    throw std::logic_error("symbol " + std::to_string(index) + " not allowed in this phase");
  }
  emitted_.push_back(index);
  switch (phase_) {
    case Phase::kBegin:
      if (index == kEosIndex) {
        done_ = true;
      } else {
        begin_ = index;
        phase_ = Phase::kEnd;
      }
      break;
    case Phase::kEnd:
      last_end_ = index;
      if (task_has_sentiment(task_)) {
        phase_ = Phase::kSentiment;
      } else {
        ++triplets_;
        phase_ = Phase::kBegin;
      }
      break;
    case Phase::kSentiment:
      ++triplets_;
      phase_ = Phase::kBegin;
      break;
  }
}

TripletSequence GenerationState::result() const {
  TripletSequence out{task_, {}, !done_};
  const std::size_t width = task_has_sentiment(task_) ? 3 : 2;
  for (std::size_t i = 0; i + width <= emitted_.size(); i += width) {
    if (emitted_[i] == kEosIndex) break;
    Triplet t{emitted_[i], emitted_[i + 1], std::nullopt};
    if (width == 3) t.sentiment = index_to_symbol(emitted_[i + 2], l_t_).sentiment;
    out.items.push_back(t);
  }
  return out;
}

TripletSequence constrained_decode(const StepLogits& step, Task task, int text_length, int max_steps,
                                   std::span<const AspectSpan> forced) {
  GenerationState state(task, text_length, forced);
  while (!state.done() && state.steps() < max_steps) {
    const std::vector<double> logits = step(state.emitted());
    state.emit(state.choose(logits));
  }
  return state.result();
}

Prediction predict(const GmpModel& model, const Instance& instance, int max_steps) {
  const auto& cfg = model.config();
  nn::Tape tape(false);
  const TaskContext ctx = build_context(tape, model, instance, CountSource::kPredicted);
  const auto& decoder = model.task_decoder();
  const nn::MemoryCache cache = decoder.precompute(tape, ctx.memory);

  auto step = [&](std::span<const int> prefix) {
    std::vector<int> ids{0};
    ids.insert(ids.end(), prefix.begin(), prefix.end());
    nn::Var hidden = decoder.decode(tape, ctx.memory, nn::gather_rows(ctx.input_table, ids), &cache);
    nn::Var last = nn::slice_rows(hidden, hidden.rows() - 1, 1);
    const nn::Matrix& logits = pointer_distribution(last, ctx.output_table).value();
    return std::vector<double>(logits.data(), logits.data() + logits.size());
  };

  Prediction out;
  out.triplets = constrained_decode(step, cfg.task, instance.text_length(),
                                    max_steps > 0 ? std::min(max_steps, cfg.max_target_len) : cfg.max_target_len,
                                    instance.aspects);
  if (ctx.prompts.count_logits) out.predicted_count = predicted_count(*ctx.prompts.count_logits);
  return out;
}

}  // namespace gmp
