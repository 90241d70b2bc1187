#include "gmp/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "gmp/errors.hpp"

namespace gmp::nn {

Parameter& ParameterStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  Parameter& p = params_.emplace_back();
  p.name = name;
  p.value.setZero(rows, cols);
  p.grad.setZero(rows, cols);
  return p;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second];
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) s += p.grad.squaredNorm();
  return std::sqrt(s);
}

void init_xavier(Parameter& p, Rng& rng) {
  const double fan = static_cast<double>(p.value.rows() + p.value.cols());
  const double limit = fan > 0 ? std::sqrt(6.0 / fan) : 0.0;
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
}

void init_normal(Parameter& p, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
}

Linear Linear::create(ParameterStore& store, const std::string& name, int in, int out, Rng& rng) {
  Linear l;
  l.weight = &store.add(name + ".w", in, out);
  l.bias = &store.add(name + ".b", 1, out);
  init_xavier(*l.weight, rng);
  return l;
}

Var Linear::operator()(Tape& tape, Var x) const {
  return affine(x, tape.param(*weight), tape.param(*bias));
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, int width) {
  LayerNorm n;
  n.gain = &store.add(name + ".g", 1, width);
  n.bias = &store.add(name + ".b", 1, width);
  n.gain->value.setOnes();
  return n;
}

Var LayerNorm::operator()(Tape& tape, Var x) const {
  return layer_norm(x, tape.param(*gain), tape.param(*bias));
}

MlpHead MlpHead::create(ParameterStore& store, const std::string& name, int in, int hidden, int out,
                        Rng& rng) {
  MlpHead h;
  h.layers.push_back(Linear::create(store, name + ".l1", in, hidden, rng));
  h.layers.push_back(Linear::create(store, name + ".l2", hidden, out, rng));
  return h;
}

MlpHead MlpHead::create_single(ParameterStore& store, const std::string& name, int in, int out,
                               Rng& rng) {
  MlpHead h;
  h.layers.push_back(Linear::create(store, name + ".l1", in, out, rng));
  return h;
}

Var MlpHead::operator()(Tape& tape, Var x) const {
  Var h = layers.front()(tape, x);
  for (std::size_t i = 1; i < layers.size(); ++i) h = layers[i](tape, gelu(h));
  return h;
}

Matrix sinusoid_positions(std::span<const int> positions, int width) {
  Matrix out(static_cast<Eigen::Index>(positions.size()), width);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    for (int c = 0; c < width; ++c) {
      const double rate = std::pow(10000.0, -static_cast<double>(c - c % 2) / width);
      const double angle = positions[r] * rate;
      out(static_cast<Eigen::Index>(r), c) = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return out;
}

Var AttentionBlock::self(Tape& tape, Var x, bool causal) const {
  Var q = query(tape, x);
  Var k = key(tape, x);
  Var v = value(tape, x);
  return output(tape, attention(q, k, v, heads, causal));
}

Var AttentionBlock::cross(Tape& tape, Var x, Var key_rows, Var value_rows) const {
  Var q = query(tape, x);
  return output(tape, attention(q, key_rows, value_rows, heads, false));
}

Var FeedForward::operator()(Tape& tape, Var x) const { return out(tape, gelu(in(tape, x))); }

TransformerStack TransformerStack::create(ParameterStore& store, const std::string& name, Kind kind,
                                          int d, int layers, int heads, int ffn_mult, int max_len,
                                          Rng& rng) {
  TransformerStack s;
  s.kind_ = kind;
  s.d_ = d;
  s.max_len_ = max_len;
  for (int i = 0; i < layers; ++i) {
    const std::string p = name + ".layer" + std::to_string(i);
    Block b;
    b.norm_self = LayerNorm::create(store, p + ".ln_self", d);
    b.self_attn = AttentionBlock{Linear::create(store, p + ".self.q", d, d, rng),
                                 Linear::create(store, p + ".self.k", d, d, rng),
                                 Linear::create(store, p + ".self.v", d, d, rng),
                                 Linear::create(store, p + ".self.o", d, d, rng), heads};
    if (kind == Kind::kDecoder) {
      b.norm_cross = LayerNorm::create(store, p + ".ln_cross", d);
      b.cross_attn = AttentionBlock{Linear::create(store, p + ".cross.q", d, d, rng),
                                    Linear::create(store, p + ".cross.k", d, d, rng),
                                    Linear::create(store, p + ".cross.v", d, d, rng),
                                    Linear::create(store, p + ".cross.o", d, d, rng), heads};
    }
    b.norm_ffn = LayerNorm::create(store, p + ".ln_ffn", d);
    b.ffn = FeedForward{Linear::create(store, p + ".ffn.in", d, d * ffn_mult, rng),
                        Linear::create(store, p + ".ffn.out", d * ffn_mult, d, rng)};
    s.blocks_.push_back(b);
  }
  s.final_norm_ = LayerNorm::create(store, name + ".ln_final", d);
  return s;
}

void TransformerStack::check_input(Var x) const {
  if (x.cols() != d_) {
    throw DimensionError("stack input width " + std::to_string(x.cols()) + " != " +
                         std::to_string(d_));
  }
  if (x.rows() > max_len_) {
    throw CapacityError("sequence of length " + std::to_string(x.rows()) +
                        " exceeds stack capacity " + std::to_string(max_len_));
  }
}

Var TransformerStack::encode(Tape& tape, Var input, std::span<const int> positions) const {
  check_input(input);
  Var x = input;
  if (!positions.empty()) {
    if (static_cast<Eigen::Index>(positions.size()) != input.rows()) {
      throw DimensionError("one position per input row required");
    }
    x = add_constant(x, sinusoid_positions(positions, d_));
  }
  x = dropout(x);
  for (const Block& b : blocks_) {
    x = add(x, dropout(b.self_attn.self(tape, b.norm_self(tape, x), false)));
    x = add(x, dropout(b.ffn(tape, b.norm_ffn(tape, x))));
  }
  return final_norm_(tape, x);
}

MemoryCache TransformerStack::precompute(Tape& tape, Var memory) const {
  MemoryCache cache;
  for (const Block& b : blocks_) {
    cache.keys.push_back(b.cross_attn.key(tape, memory));
    cache.values.push_back(b.cross_attn.value(tape, memory));
  }
  return cache;
}

Var TransformerStack::decode(Tape& tape, Var memory, Var prefix, const MemoryCache* cache) const {
  if (kind_ != Kind::kDecoder) throw std::logic_error("decode on an encoder stack");
  check_input(prefix);
  if (memory.cols() != d_) throw DimensionError("memory width mismatch");
  std::vector<int> steps(static_cast<std::size_t>(prefix.rows()));
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<int>(i);
  Var x = add_constant(prefix, sinusoid_positions(steps, d_));
  x = dropout(x);
  const bool has_memory = memory.rows() > 0;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& b = blocks_[l];
    x = add(x, dropout(b.self_attn.self(tape, b.norm_self(tape, x), true)));
    if (has_memory) {
      Var k = cache ? cache->keys[l] : b.cross_attn.key(tape, memory);
      Var v = cache ? cache->values[l] : b.cross_attn.value(tape, memory);
      x = add(x, dropout(b.cross_attn.cross(tape, b.norm_cross(tape, x), k, v)));
    }
    x = add(x, dropout(b.ffn(tape, b.norm_ffn(tape, x))));
  }
  return final_norm_(tape, x);
}

}  // namespace gmp::nn
