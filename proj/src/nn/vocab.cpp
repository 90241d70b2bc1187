#include "gmp/nn/vocab.hpp"

#include "gmp/errors.hpp"

namespace gmp::nn {

namespace {

const char* const kSpecialNames[] = {"<unk>",  "<img>",  "</img>", "<is>",    "<cap>",
                                     "</cap>", "<bos>",  "<eos>",  "<prom>",  "</prom>",
                                     "<senti>", "<gap>", "<gsp>"};
static_assert(std::size(kSpecialNames) == static_cast<std::size_t>(Special::kCount));

}  // namespace

Vocab::Vocab() {
  for (const char* name : kSpecialNames) add(name);
}

Vocab::Vocab(std::vector<std::string> tokens) {
  for (std::size_t i = 0; i < std::size(kSpecialNames); ++i) {
    if (i >= tokens.size() || tokens[i] != kSpecialNames[i]) {
      throw VocabError("vocabulary does not start with the special tokens");
    }
  }
  for (const auto& t : tokens) {
    if (index_.count(t)) throw VocabError("duplicate vocabulary entry '" + t + "'");
    add(t);
  }
}

Vocab Vocab::build(std::span<const Instance> instances) {
  Vocab v;
  for (const auto& inst : instances) {
    for (const auto& t : inst.text_tokens) v.add(t);
    if (inst.caption_tokens) {
      for (const auto& t : *inst.caption_tokens) v.add(t);
    }
  }
  return v;
}

void Vocab::add(const std::string& token) {
  if (index_.count(token)) return;
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? special(Special::kUnk) : it->second;
}

std::vector<int> Vocab::ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

const std::string& Vocab::token(int id) const {
  check(id);
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::check(int id) const {
  if (id < 0 || id >= size()) {
    throw VocabError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(size()));
  }
}

}  // namespace gmp::nn
