#include "gmp/nn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include "gmp/errors.hpp"

namespace gmp::nn {

static_assert(std::endian::native == std::endian::little, "checkpoints store little-endian doubles");

namespace {

constexpr const char* kMagic = "GMP-CHECKPOINT 1";

std::size_t read_count(std::istream& in, const std::string& keyword, const std::string& where) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(where + ": missing '" + keyword + "' section");
  std::istringstream ss(line);
  std::string word;
  long long n = -1;
  if (!(ss >> word >> n) || word != keyword || n < 0) {
    throw IoError(where + ": expected '" + keyword + " <count>', got '" + line + "'");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const Vocab& vocab, const ParameterStore& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << kMagic << '\n';
    const auto cfg = config.to_map();
    out << "config " << cfg.size() << '\n';
    for (const auto& [k, v] : cfg) out << k << '=' << v << '\n';
    out << "vocab " << vocab.size() << '\n';
    for (const auto& t : vocab.tokens()) {
      if (t.find('\n') != std::string::npos) throw IoError("token contains a newline");
      out << t << '\n';
    }
    out << "tensors " << params.all().size() << '\n';
    for (const auto& p : params.all()) {
      out << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
      out.write(reinterpret_cast<const char*>(p.value.data()),
                static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw IoError(where + ": not a GMP checkpoint");

  CheckpointData data;
  const std::size_t n_cfg = read_count(in, "config", where);
  for (std::size_t i = 0; i < n_cfg; ++i) {
    if (!std::getline(in, line)) throw IoError(where + ": truncated config section");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(where + ": bad config line '" + line + "'");
    try {
      if (!data.config.set(line.substr(0, eq), line.substr(eq + 1))) {
        throw IoError(where + ": unknown config key '" + line.substr(0, eq) + "'");
      }
    } catch (const ConfigError& e) {
      throw IoError(where + ": " + e.what());
    }
  }

  const std::size_t n_vocab = read_count(in, "vocab", where);
  std::vector<std::string> tokens;
  tokens.reserve(n_vocab);
  for (std::size_t i = 0; i < n_vocab; ++i) {
    if (!std::getline(in, line)) throw IoError(where + ": truncated vocab section");
    tokens.push_back(line);
  }
  try {
    data.vocab = Vocab(std::move(tokens));
  } catch (const VocabError& e) {
    throw IoError(where + ": " + e.what());
  }

  const std::size_t n_tensors = read_count(in, "tensors", where);
  for (std::size_t i = 0; i < n_tensors; ++i) {
    if (!std::getline(in, line)) throw IoError(where + ": truncated tensor header");
    std::istringstream ss(line);
    std::string name;
    Eigen::Index rows = -1, cols = -1;
    if (!(ss >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw IoError(where + ": bad tensor header '" + line + "'");
    }
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw IoError(where + ": truncated tensor '" + name + "'");
    data.tensors.emplace_back(std::move(name), std::move(m));
  }
  return data;
}

void load_parameters(ParameterStore& params, const CheckpointData& data) {
  if (data.tensors.size() != params.all().size()) {
    throw IoError("checkpoint has " + std::to_string(data.tensors.size()) + " tensors, model has " +
                  std::to_string(params.all().size()));
  }
  std::set<std::string> seen;
  for (const auto& [name, value] : data.tensors) {
    if (!params.contains(name)) throw IoError("checkpoint tensor '" + name + "' not in model");
    if (!seen.insert(name).second) throw IoError("duplicate checkpoint tensor '" + name + "'");
    Parameter& p = params.get(name);
    if (p.value.rows() != value.rows() || p.value.cols() != value.cols()) {
      throw IoError("shape mismatch for tensor '" + name + "'");
    }
    p.value = value;
  }
}

}  // namespace gmp::nn
