#include "gmp/nstream_decoders.hpp"

#include <algorithm>

#include "gmp/errors.hpp"

namespace gmp {

namespace {

void check_count(int n) {
  if (n < 1 || n > kMaxAspectCount) {
    throw DataError("prompt count " + std::to_string(n) + " outside [1, 5]");
  }
}

nn::Var last_row(nn::Var x) { return nn::slice_rows(x, x.rows() - 1, 1); }

}  // namespace

nn::Var predict_aspect_count(nn::Tape& tape, const GmpModel& model, nn::Var h_aspect) {
  nn::Var bos = model.special_row(tape, nn::Special::kBos);
  nn::Var h = model.count_decoder().decode(tape, h_aspect, bos);
  return model.count_head()(tape, h);
}

nn::Var count_loss(nn::Var count_logits, int n_gold) {
  if (n_gold < 1) throw DataError("gold aspect count must be >= 1");
  const int target = std::min(n_gold, kMaxAspectCount) - 1;
  return nn::cross_entropy(count_logits, std::span<const int>(&target, 1));
}

int predicted_count(const nn::Var& count_logits) {
  const auto& v = count_logits.value();
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < v.cols(); ++j) {
    if (v(0, j) > v(0, best)) best = j;
  }
  return static_cast<int>(best) + 1;
}

nn::Var generate_aspect_prompts(nn::Tape& tape, const GmpModel& model, nn::Var h_aspect, int n) {
  check_count(n);
  const auto& dec = model.aspect_prompt_decoder();
  nn::Var bos = model.special_row(tape, nn::Special::kBos);
  nn::Var h1 = dec.decode(tape, h_aspect, bos);
  const std::vector<nn::Var> prefix{bos, h1};
  nn::Var h2 = last_row(dec.decode(tape, h_aspect, nn::concat_rows(prefix)));
  nn::Var joint = nn::concat_cols(h1, h2);

  const int d = model.config().d;
  std::vector<nn::Var> groups;
  for (int k = 1; k <= n; ++k) {
    groups.push_back(nn::reshape(model.aspect_head(k)(tape, joint), 2, d));
  }
  return nn::concat_rows(groups);
}

nn::Var generate_sentiment_prompt(nn::Tape& tape, const GmpModel& model, nn::Var h_sentiment,
                                  int n, bool distinct) {
  check_count(n);
  const auto& dec = model.sentiment_prompt_decoder();
  std::vector<nn::Var> prefix{model.special_row(tape, nn::Special::kBos)};
  nn::Var p = dec.decode(tape, h_sentiment, prefix.front());
  if (!distinct) return nn::repeat_rows(p, n);
  std::vector<nn::Var> out{p};
  for (int k = 2; k <= n; ++k) {
    prefix.push_back(out.back());
    out.push_back(last_row(dec.decode(tape, h_sentiment, nn::concat_rows(prefix))));
  }
  return nn::concat_rows(out);
}

}  // namespace gmp
