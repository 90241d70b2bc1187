#include "gmp/multimodal_encoder.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "gmp/data_pipeline.hpp"
#include "gmp/errors.hpp"

namespace gmp {

void LayoutMap::append(std::string name, int length) {
  segments_.push_back({std::move(name), total_, length});
  total_ += length;
}

bool LayoutMap::has(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

const Segment& LayoutMap::segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("layout has no segment '" + std::string(name) + "'");
}

int LayoutMap::pointer_row(int p) const {
  const Segment& text = segment("E_T");
  if (p < 1 || p > text.length) {
    throw RangeError("pointer " + std::to_string(p) + " outside [1, " + std::to_string(text.length) +
                     "]");
  }
  return text.start + p - 1;
}

nn::Var project_image(nn::Tape& tape, const GmpModel& model, const Eigen::VectorXd& feature) {
  const auto& cfg = model.config();
  nn::Var f = tape.constant(nn::Matrix(feature.transpose()));
  nn::Var flat = model.image_projection()(tape, f);
  return nn::reshape(flat, cfg.l_i, cfg.d);
}

BaseSegments embed_instance(nn::Tape& tape, const GmpModel& model, const Instance& instance) {
  const auto& cfg = model.config();
  if (instance.text_length() > cfg.max_l_t) {
    throw CapacityError("instance '" + instance.id + "': text length " +
                        std::to_string(instance.text_length()) + " exceeds max_l_t " +
                        std::to_string(cfg.max_l_t));
  }
  BaseSegments base;
  bool drop_image = cfg.ablations.no_image;
  if (!drop_image && tape.training() && cfg.image_dropout > 0.0) {
    drop_image = std::bernoulli_distribution(cfg.image_dropout)(tape.dropout_rng());
  }
  const Eigen::VectorXd feature =
      drop_image ? Eigen::VectorXd::Zero(cfg.d_v) : provide_image_feature(instance, cfg.d_v);
  base.image = project_image(tape, model, feature);

  std::vector<int> caption_ids;
  if (!cfg.ablations.no_caption && instance.caption_tokens) {
    const auto& cap = *instance.caption_tokens;
    const std::size_t n = std::min(cap.size(), static_cast<std::size_t>(cfg.max_l_cap));
    caption_ids = model.vocab().ids(std::span<const std::string>(cap.data(), n));
  }
  base.caption = model.embed(tape, caption_ids);
  base.text = model.embed_text(tape, model.vocab().ids(instance.text_tokens));
  return base;
}

SequenceBuilder& SequenceBuilder::special(nn::Special s, std::string name, int count) {
  pending_.insert(pending_.end(), static_cast<std::size_t>(count), model_.vocab().special(s));
  layout_.append(std::move(name), count);
  return *this;
}

SequenceBuilder& SequenceBuilder::rows(nn::Var r, std::string name) {
  flush_specials();
  layout_.append(std::move(name), static_cast<int>(r.rows()));
  if (r.rows() > 0) parts_.push_back(r);
  return *this;
}

void SequenceBuilder::flush_specials() {
  if (pending_.empty()) return;
  parts_.push_back(model_.embed(tape_, pending_));
  pending_.clear();
}

SequenceBuilder::Result SequenceBuilder::build() {
  flush_specials();
  return {nn::concat_rows(parts_), std::move(layout_)};
}

MultimodalEmbedding assemble_multimodal(nn::Tape& tape, const GmpModel& model,
                                        const BaseSegments& base) {
  using nn::Special;
  SequenceBuilder b(tape, model);
  b.special(Special::kImg, "img")
      .rows(base.image, "V")
      .special(Special::kImgEnd, "/img")
      .special(Special::kIs, "is")
      .special(Special::kCap, "cap")
      .rows(base.caption, "E_C")
      .special(Special::kCapEnd, "/cap")
      .special(Special::kBos, "bos")
      .rows(base.text, "E_T")
      .special(Special::kEos, "eos");
  auto r = b.build();
  return {r.rows, std::move(r.layout)};
}

nn::Var encode_aspect_branch(nn::Tape& tape, const GmpModel& model, const MultimodalEmbedding& e) {
  return model.encoder_a().encode(tape, e.rows, model.encoder_positions(static_cast<int>(e.rows.rows())));
}

nn::Var encode_sentiment_branch(nn::Tape& tape, const GmpModel& model,
                                const MultimodalEmbedding& e) {
  return model.encoder_s().encode(tape, e.rows, model.encoder_positions(static_cast<int>(e.rows.rows())));
}

DualEncoding encode_dual(nn::Tape& tape, const GmpModel& model, const MultimodalEmbedding& e) {
  return {encode_aspect_branch(tape, model, e), encode_sentiment_branch(tape, model, e)};
}

}  // namespace gmp
