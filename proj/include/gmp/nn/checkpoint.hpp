#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gmp/nn/layers.hpp"
#include "gmp/nn/model_config.hpp"
#include "gmp/nn/vocab.hpp"

namespace gmp::nn {

// Checkpoint layout:
//   GMP-CHECKPOINT 1
//   config <k>        followed by k lines key=value
//   vocab <m>         followed by m lines, one token each
//   tensors <t>       followed by t records: "name rows cols\n" + rows*cols
//                     little-endian doubles (row-major)
struct CheckpointData {
  ModelConfig config;
  Vocab vocab;
  std::vector<std::pair<std::string, Matrix>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const Vocab& vocab, const ParameterStore& params);

// Throws IoError on a missing, truncated or malformed file.
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Copies tensors into `params`; names and shapes must match one-to-one (IoError otherwise).
void load_parameters(ParameterStore& params, const CheckpointData& data);

}  // namespace gmp::nn
