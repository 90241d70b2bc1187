#pragma once

#include <random>
#include <string>
#include <vector>

#include "gmp/core_types.hpp"
#include "gmp/gmp_model.hpp"

namespace gmp::testing {

// Small but complete architecture for fast tests.
inline nn::ModelConfig tiny_config(Task task, int d = 8) {
  nn::ModelConfig c;
  c.task = task;
  c.d = d;
  c.position_width = 4;
  c.n_layers = 1;
  c.n_heads = 2;
  c.ffn_mult = 2;
  c.d_v = 6;
  c.l_i = 2;
  c.max_l_t = 16;
  c.max_l_cap = 4;
  c.max_target_len = 16;
  c.emb_std = 0.5;
  c.seed = 11;
  return c;
}

// Random valid instance: l_t tokens, n sorted non-overlapping spans of width <= 2.
inline Instance random_instance(std::mt19937_64& rng, int l_t, int n, int d_v,
                                bool with_caption = true) {
  Instance inst;
  inst.id = "r" + std::to_string(rng() % 100000);
  for (int i = 0; i < l_t; ++i) inst.text_tokens.push_back("t" + std::to_string(rng() % 20));
  std::vector<int> starts;
  int p = 1;
  for (int k = 0; k < n && p <= l_t; ++k) {
    const int remaining = n - k;
    const int slack = (l_t - p + 1) - remaining;
    const int skip = slack > 0 ? static_cast<int>(rng() % static_cast<unsigned>(std::min(slack, 2) + 1)) : 0;
    const int begin = p + skip;
    if (begin > l_t) break;
    const int width = (begin < l_t && rng() % 3 == 0) ? 2 : 1;
    inst.aspects.push_back({begin, begin + width - 1});
    inst.sentiments.push_back(static_cast<Sentiment>(rng() % 3));
    p = begin + width;
  }
  Eigen::VectorXd f(d_v);
  std::normal_distribution<double> normal;
  for (int i = 0; i < d_v; ++i) f(i) = normal(rng);
  inst.image_feature = f;
  if (with_caption) inst.caption_tokens = std::vector<std::string>{"c1", "c2", "t3"};
  return inst;
}

inline Instance fixed_instance(int d_v) {
  Instance inst;
  inst.id = "fixed";
  inst.text_tokens = {"the", "pizza", "was", "great", "but", "slow", "service"};
  inst.aspects = {{2, 2}, {6, 7}};
  inst.sentiments = {Sentiment::kPos, Sentiment::kNeg};
  Eigen::VectorXd f(d_v);
  for (int i = 0; i < d_v; ++i) f(i) = 0.1 * (i + 1) - 0.3;
  inst.image_feature = f;
  inst.caption_tokens = std::vector<std::string>{"pizza", "service"};
  return inst;
}

}  // namespace gmp::testing
