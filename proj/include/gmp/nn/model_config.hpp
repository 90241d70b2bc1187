#pragma once

#include <map>
#include <string>

#include "gmp/core_types.hpp"

namespace gmp::nn {

// Architecture switches matching the ablation study.
struct Ablations {
  bool no_image = false;      // image feature replaced by zeros
  bool no_caption = false;    // caption segment left empty
  bool no_multitask = false;  // lambda forced to 0, inference count fixed at 5
  bool no_prompt = false;     // prompt segment omitted
  bool no_gap = false;        // aspect prompt rows replaced by a learned placeholder
  bool no_gsp = false;        // sentiment prompt row replaced by a learned placeholder
  bool dsp = false;           // distinct sentiment prompt per aspect (MASC only)

  bool operator==(const Ablations&) const = default;
};

// Throws ConfigError when a flag is undefined for the task.
void check_ablations(Task task, const Ablations& ablations);

struct ModelConfig {
  Task task = Task::kJmasa;
  int d = 64;
  int n_layers = 2;
  int n_heads = 4;
  int ffn_mult = 4;
  int d_v = 128;
  int l_i = 4;
  int max_l_t = 32;
  int max_l_cap = 8;
  int max_target_len = 31;  // decoder capacity in symbols, EOS included
  double lambda = 0.1;
  double lr = 6.5e-5;
  double lr_scale = 16.0;   // effective step size = lr * lr_scale
  double clip_norm = 1.0;   // global gradient-norm clip, 0 disables
  double emb_std = 1.0;
  double dropout = 0.1;        // residual/embedding dropout in training mode
  double weight_decay = 1.0;   // decoupled, per unit of effective lr
  double image_dropout = 0.5;  // training-time probability of zeroing the image feature
  // Leading columns that carry the text position code; token embeddings start
  // at zero there. 0 shares all d columns between token and position.
  int position_width = 16;
  int epochs = 70;
  int batch_size = 4;
  unsigned long long seed = 42;
  bool share_s_branch = false;     // task encoder shares weights with the s-branch instead
  bool encoder_positions = false;  // add sinusoidal row positions inside encoder stacks
  Ablations ablations;

  double effective_lr() const { return lr * lr_scale; }
  double effective_lambda() const { return ablations.no_multitask ? 0.0 : lambda; }
  int max_encoder_len() const { return l_i + max_l_cap + max_l_t + 4 * kMaxAspectCount + 9; }

  // Throws ConfigError on any violated invariant.
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  // Applies recognised keys; returns false for an unknown key.
  bool set(const std::string& key, const std::string& value);

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace gmp::nn
