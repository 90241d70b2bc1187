#pragma once

#include <deque>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gmp/nn/autograd.hpp"

namespace gmp::nn {

using Rng = std::mt19937_64;

// Named parameters with stable addresses, in creation order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  // Zero-initialised. Throws std::invalid_argument on a duplicate name.
  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::deque<Parameter>& all() { return params_; }
  const std::deque<Parameter>& all() const { return params_; }

  void zero_grad();
  std::size_t scalar_count() const;
  double grad_norm() const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

void init_xavier(Parameter& p, Rng& rng);
void init_normal(Parameter& p, double stddev, Rng& rng);

struct Linear {
  Parameter* weight = nullptr;  // in x out
  Parameter* bias = nullptr;    // 1 x out

  static Linear create(ParameterStore& store, const std::string& name, int in, int out, Rng& rng);
  Var operator()(Tape& tape, Var x) const;
  int in() const { return static_cast<int>(weight->value.rows()); }
  int out() const { return static_cast<int>(weight->value.cols()); }
};

struct LayerNorm {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;

  static LayerNorm create(ParameterStore& store, const std::string& name, int width);
  Var operator()(Tape& tape, Var x) const;
};

// affine -> GELU -> affine; with no hidden layer it is a single affine map.
struct MlpHead {
  std::vector<Linear> layers;

  static MlpHead create(ParameterStore& store, const std::string& name, int in, int hidden, int out,
                        Rng& rng);
  static MlpHead create_single(ParameterStore& store, const std::string& name, int in, int out,
                               Rng& rng);
  Var operator()(Tape& tape, Var x) const;
  int out() const { return layers.back().out(); }
};

// Sinusoidal encodings for the given positions, one row each.
Matrix sinusoid_positions(std::span<const int> positions, int width);

struct AttentionBlock {
  Linear query, key, value, output;
  int heads = 1;

  Var self(Tape& tape, Var x, bool causal) const;
  Var cross(Tape& tape, Var x, Var key_rows, Var value_rows) const;
};

struct FeedForward {
  Linear in, out;
  Var operator()(Tape& tape, Var x) const;
};

// Keys and values of the encoder memory, projected once per decoder layer.
struct MemoryCache {
  std::vector<Var> keys;
  std::vector<Var> values;
};

// Pre-norm transformer stack. Encoder layers: self-attention + feed-forward.
// Decoder layers add causal masking and cross-attention over a memory.
class TransformerStack {
 public:
  enum class Kind { kEncoder, kDecoder };

  static TransformerStack create(ParameterStore& store, const std::string& name, Kind kind, int d,
                                 int layers, int heads, int ffn_mult, int max_len, Rng& rng);

  // Positions empty: no position encoding is added.
  Var encode(Tape& tape, Var input, std::span<const int> positions = {}) const;
  // Step positions 0..len_p-1 are added to the prefix.
  Var decode(Tape& tape, Var memory, Var prefix, const MemoryCache* cache = nullptr) const;
  MemoryCache precompute(Tape& tape, Var memory) const;

  Kind kind() const { return kind_; }
  int width() const { return d_; }
  int max_len() const { return max_len_; }
  int layer_count() const { return static_cast<int>(blocks_.size()); }

 private:
  struct Block {
    LayerNorm norm_self, norm_cross, norm_ffn;
    AttentionBlock self_attn, cross_attn;
    FeedForward ffn;
  };

  void check_input(Var x) const;

  Kind kind_ = Kind::kEncoder;
  int d_ = 0;
  int max_len_ = 0;
  std::vector<Block> blocks_;
  LayerNorm final_norm_;
};

}  // namespace gmp::nn
