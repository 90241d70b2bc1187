#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>

#include "gmp/nn/layers.hpp"
#include "gmp/nn/model_config.hpp"
#include "gmp/nn/vocab.hpp"

namespace gmp {

// All parameters of one model plus the wiring between stacks.
//
// Parameter groups (name prefixes):
//   embed.tokens      shared token table (text, caption and special tokens)
//   embed.sentiments  sentiment-label table, rows in Sentiment order
//   image             image projection (d_v -> l_i * d)
//   enc_a, enc_s      aspect- and sentiment-branch encoders
//   dec_and, dec_apd, dec_spd   aspect-count, aspect-prompt, sentiment-prompt decoders
//   dec_task          triplet decoder
//   head.count, head.aspect1..5
//
// The task encoder is enc_a (or enc_s with share_s_branch).
class GmpModel {
 public:
  GmpModel(nn::ModelConfig config, nn::Vocab vocab);
  GmpModel(const GmpModel&) = delete;
  GmpModel& operator=(const GmpModel&) = delete;

  const nn::ModelConfig& config() const { return config_; }
  const nn::Vocab& vocab() const { return vocab_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  // Token-table rows; throws VocabError for an id outside the vocabulary.
  nn::Var embed(nn::Tape& tape, std::span<const int> ids) const;
  nn::Var special_row(nn::Tape& tape, nn::Special s) const;
  // Text embedding: token rows plus a sinusoidal code of the 1-based text index.
  nn::Var embed_text(nn::Tape& tape, std::span<const int> ids) const;
  nn::Var sentiment_table(nn::Tape& tape) const;

  const nn::Linear& image_projection() const { return image_; }
  const nn::TransformerStack& encoder_a() const { return enc_a_; }
  const nn::TransformerStack& encoder_s() const { return enc_s_; }
  const nn::TransformerStack& task_encoder() const {
    return config_.share_s_branch ? enc_s_ : enc_a_;
  }
  const nn::TransformerStack& count_decoder() const { return dec_and_; }
  const nn::TransformerStack& aspect_prompt_decoder() const { return dec_apd_; }
  const nn::TransformerStack& sentiment_prompt_decoder() const { return dec_spd_; }
  const nn::TransformerStack& task_decoder() const { return dec_task_; }
  const nn::MlpHead& count_head() const { return count_head_; }
  const nn::MlpHead& aspect_head(int k) const;  // k in [1, 5]

  // Row positions handed to encoder stacks (empty unless encoder_positions).
  std::vector<int> encoder_positions(int length) const;

 private:
  nn::ModelConfig config_;
  nn::Vocab vocab_;
  nn::ParameterStore params_;
  nn::Parameter* tokens_ = nullptr;
  nn::Parameter* sentiments_ = nullptr;
  nn::Linear image_;
  nn::TransformerStack enc_a_, enc_s_, dec_and_, dec_apd_, dec_spd_, dec_task_;
  nn::MlpHead count_head_;
  std::array<nn::MlpHead, kMaxAspectCount> aspect_heads_;
};

void save_model(const std::filesystem::path& path, const GmpModel& model);
// Rebuilds the model from the stored config and vocabulary; throws IoError.
std::unique_ptr<GmpModel> load_model(const std::filesystem::path& path);

}  // namespace gmp
