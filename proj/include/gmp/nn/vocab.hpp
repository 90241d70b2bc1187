#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmp/core_types.hpp"

namespace gmp::nn {

// Special tokens occupy the first ids in this order.
enum class Special : int {
  kUnk = 0,
  kImg,
  kImgEnd,
  kIs,
  kCap,
  kCapEnd,
  kBos,
  kEos,
  kProm,
  kPromEnd,
  kSenti,
  kGapPlaceholder,
  kGspPlaceholder,
  kCount
};

class Vocab {
 public:
  Vocab();  // specials only
  explicit Vocab(std::vector<std::string> tokens);  // must start with the specials

  // Specials plus every text and caption token of `instances`, in first-seen order.
  static Vocab build(std::span<const Instance> instances);

  int size() const { return static_cast<int>(tokens_.size()); }
  int special(Special s) const { return static_cast<int>(s); }
  // Unknown tokens map to <unk>.
  int id(const std::string& token) const;
  std::vector<int> ids(std::span<const std::string> tokens) const;
  const std::string& token(int id) const;  // throws VocabError
  void check(int id) const;                // throws VocabError
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace gmp::nn
