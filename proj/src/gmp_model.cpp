#include "gmp/gmp_model.hpp"

#include <numeric>

#include "gmp/errors.hpp"
#include "gmp/nn/checkpoint.hpp"

namespace gmp {

using nn::TransformerStack;

GmpModel::GmpModel(nn::ModelConfig config, nn::Vocab vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  nn::Rng rng(config_.seed);
  const int d = config_.d;
  tokens_ = &params_.add("embed.tokens", vocab_.size(), d);
  nn::init_normal(*tokens_, config_.emb_std, rng);
  tokens_->value.leftCols(config_.position_width).setZero();
  sentiments_ = &params_.add("embed.sentiments", kNumSentiments, d);
  nn::init_normal(*sentiments_, config_.emb_std, rng);
  image_ = nn::Linear::create(params_, "image", config_.d_v, config_.l_i * d, rng);

  const int enc_len = config_.max_encoder_len();
  const int dec_len = config_.max_target_len;
  auto stack = [&](const char* name, TransformerStack::Kind kind, int max_len) {
    return TransformerStack::create(params_, name, kind, d, config_.n_layers, config_.n_heads,
                                    config_.ffn_mult, max_len, rng);
  };
  enc_a_ = stack("enc_a", TransformerStack::Kind::kEncoder, enc_len);
  enc_s_ = stack("enc_s", TransformerStack::Kind::kEncoder, enc_len);
  dec_and_ = stack("dec_and", TransformerStack::Kind::kDecoder, 1);
  dec_apd_ = stack("dec_apd", TransformerStack::Kind::kDecoder, 2);
  dec_spd_ = stack("dec_spd", TransformerStack::Kind::kDecoder, std::max(kMaxAspectCount, dec_len));
  dec_task_ = stack("dec_task", TransformerStack::Kind::kDecoder, dec_len);

  count_head_ = nn::MlpHead::create(params_, "head.count", d, d, kMaxAspectCount, rng);
  for (int k = 1; k <= kMaxAspectCount; ++k) {
    aspect_heads_[static_cast<std::size_t>(k - 1)] = nn::MlpHead::create(
        params_, "head.aspect" + std::to_string(k), 2 * d, 2 * d, 2 * d, rng);
  }
}

nn::Var GmpModel::embed(nn::Tape& tape, std::span<const int> ids) const {
  for (int id : ids) vocab_.check(id);
  return nn::gather_rows(tape.param(*tokens_), ids);
}

nn::Var GmpModel::special_row(nn::Tape& tape, nn::Special s) const {
  const int id = vocab_.special(s);
  return nn::gather_rows(tape.param(*tokens_), std::span<const int>(&id, 1));
}

nn::Var GmpModel::embed_text(nn::Tape& tape, std::span<const int> ids) const {
  nn::Var rows = embed(tape, ids);
  std::vector<int> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 1);
  const int width = config_.position_width > 0 ? config_.position_width : config_.d;
  nn::Matrix code = nn::Matrix::Zero(static_cast<Eigen::Index>(ids.size()), config_.d);
  code.leftCols(width) = nn::sinusoid_positions(positions, width);
  return nn::add_constant(rows, code);
}

nn::Var GmpModel::sentiment_table(nn::Tape& tape) const { return tape.param(*sentiments_); }

const nn::MlpHead& GmpModel::aspect_head(int k) const {
  if (k < 1 || k > kMaxAspectCount) throw DataError("aspect head index out of range");
  return aspect_heads_[static_cast<std::size_t>(k - 1)];
}

std::vector<int> GmpModel::encoder_positions(int length) const {
  if (!config_.encoder_positions) return {};
  std::vector<int> out(static_cast<std::size_t>(length));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

void save_model(const std::filesystem::path& path, const GmpModel& model) {
  nn::save_checkpoint(path, model.config(), model.vocab(), model.params());
}

std::unique_ptr<GmpModel> load_model(const std::filesystem::path& path) {
  nn::CheckpointData data = nn::read_checkpoint(path);
  std::unique_ptr<GmpModel> model;
  try {
    model = std::make_unique<GmpModel>(data.config, data.vocab);
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  nn::load_parameters(model->params(), data);
  return model;
}

}  // namespace gmp
