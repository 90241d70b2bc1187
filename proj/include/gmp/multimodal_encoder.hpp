#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gmp/core_types.hpp"
#include "gmp/gmp_model.hpp"

namespace gmp {

struct Segment {
  std::string name;
  int start = 0;
  int length = 0;
};

// Ordered, contiguous row segments of an assembled embedding.
// Base segment names: img, V, /img, is, cap, E_C, /cap, bos, E_T, eos.
class LayoutMap {
 public:
  void append(std::string name, int length);

  const std::vector<Segment>& segments() const { return segments_; }
  bool has(std::string_view name) const;
  const Segment& segment(std::string_view name) const;  // throws std::out_of_range
  int total_length() const { return total_; }

  // Absolute row of text pointer p (1-based); throws RangeError.
  int pointer_row(int p) const;

 private:
  std::vector<Segment> segments_;
  int total_ = 0;
};

// Number of special-token rows in E_M.
inline constexpr int kBaseSpecialRows = 7;

inline int multimodal_length(int l_i, int l_cap, int l_t) { return l_i + l_cap + l_t + kBaseSpecialRows; }

// Per-instance inputs to every assembly: V (l_i x d), E_C (l_cap x d), E_T (l_t x d).
struct BaseSegments {
  nn::Var image;
  nn::Var caption;
  nn::Var text;
  int text_length() const { return static_cast<int>(text.rows()); }
};

// Applies the no_image / no_caption ablations and the length capacities.
BaseSegments embed_instance(nn::Tape& tape, const GmpModel& model, const Instance& instance);

// V = reshape(W_i f + b_i) to l_i rows of width d.
nn::Var project_image(nn::Tape& tape, const GmpModel& model, const Eigen::VectorXd& feature);

// Concatenates rows and records the layout. Consecutive special tokens are
// looked up in one gather.
class SequenceBuilder {
 public:
  SequenceBuilder(nn::Tape& tape, const GmpModel& model) : tape_(tape), model_(model) {}

  SequenceBuilder& special(nn::Special s, std::string name, int count = 1);
  SequenceBuilder& rows(nn::Var rows, std::string name);

  struct Result {
    nn::Var rows;
    LayoutMap layout;
  };
  Result build();

 private:
  void flush_specials();

  nn::Tape& tape_;
  const GmpModel& model_;
  std::vector<nn::Var> parts_;
  std::vector<int> pending_;
  LayoutMap layout_;
};

struct MultimodalEmbedding {
  nn::Var rows;
  LayoutMap layout;
};

// [img, V, /img, is, cap, E_C, /cap, bos, E_T, eos]
MultimodalEmbedding assemble_multimodal(nn::Tape& tape, const GmpModel& model,
                                        const BaseSegments& base);

struct DualEncoding {
  nn::Var aspect;     // H^a_M
  nn::Var sentiment;  // H^s_M
};

nn::Var encode_aspect_branch(nn::Tape& tape, const GmpModel& model, const MultimodalEmbedding& e);
nn::Var encode_sentiment_branch(nn::Tape& tape, const GmpModel& model, const MultimodalEmbedding& e);
DualEncoding encode_dual(nn::Tape& tape, const GmpModel& model, const MultimodalEmbedding& e);

}  // namespace gmp
