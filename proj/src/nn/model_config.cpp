#include "gmp/nn/model_config.hpp"

#include <charconv>
#include <sstream>

#include "gmp/errors.hpp"

namespace gmp::nn {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void check_ablations(Task task, const Ablations& a) {
  auto reject = [&](const char* flag) {
    throw ConfigError(std::string("ablation '") + flag + "' is not defined for task " +
                      std::string(to_string(task)));
  };
  if (a.no_multitask && task == Task::kMasc) reject("no_multitask");
  if (a.no_gap && task == Task::kMasc) reject("no_gap");
  if (a.no_gsp && task == Task::kMate) reject("no_gsp");
  if (a.dsp && task != Task::kMasc) reject("dsp");
  if (a.dsp && a.no_gsp) throw ConfigError("ablations 'dsp' and 'no_gsp' are mutually exclusive");
}

void ModelConfig::validate() const {
  if (d <= 0 || n_heads <= 0 || d % n_heads != 0) {
    throw ConfigError("hidden size d must be a positive multiple of n_heads");
  }
  if (n_layers < 0) throw ConfigError("n_layers must be >= 0");
  if (ffn_mult <= 0) throw ConfigError("ffn_mult must be positive");
  if (d_v <= 0) throw ConfigError("d_v must be positive");
  if (l_i < 0) throw ConfigError("l_i must be >= 0");
  if (max_l_t <= 0 || max_l_cap < 0) throw ConfigError("max_l_t must be positive, max_l_cap >= 0");
  if (max_target_len < 1) throw ConfigError("max_target_len must be positive");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (lr <= 0.0 || lr_scale <= 0.0) throw ConfigError("lr and lr_scale must be positive");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (emb_std <= 0.0) throw ConfigError("emb_std must be positive");
  if (position_width < 0 || position_width > d || position_width % 2 != 0) {
    throw ConfigError("position_width must be even and in [0, d]");
  }
  if (image_dropout < 0.0 || image_dropout > 1.0) throw ConfigError("image_dropout must be in [0, 1]");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (epochs < 0 || batch_size <= 0) throw ConfigError("epochs >= 0 and batch_size > 0 required");
  check_ablations(task, ablations);
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"task", std::string(to_string(task))},
      {"d", std::to_string(d)},
      {"n_layers", std::to_string(n_layers)},
      {"n_heads", std::to_string(n_heads)},
      {"ffn_mult", std::to_string(ffn_mult)},
      {"d_v", std::to_string(d_v)},
      {"l_i", std::to_string(l_i)},
      {"max_l_t", std::to_string(max_l_t)},
      {"max_l_cap", std::to_string(max_l_cap)},
      {"max_target_len", std::to_string(max_target_len)},
      {"lambda", fmt(lambda)},
      {"lr", fmt(lr)},
      {"lr_scale", fmt(lr_scale)},
      {"clip_norm", fmt(clip_norm)},
      {"emb_std", fmt(emb_std)},
      {"dropout", fmt(dropout)},
      {"weight_decay", fmt(weight_decay)},
      {"image_dropout", fmt(image_dropout)},
      {"position_width", std::to_string(position_width)},
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"model_seed", std::to_string(seed)},
      {"share_s_branch", b(share_s_branch)},
      {"encoder_positions", b(encoder_positions)},
      {"no_image", b(ablations.no_image)},
      {"no_caption", b(ablations.no_caption)},
      {"no_multitask", b(ablations.no_multitask)},
      {"no_prompt", b(ablations.no_prompt)},
      {"no_gap", b(ablations.no_gap)},
      {"no_gsp", b(ablations.no_gsp)},
      {"dsp", b(ablations.dsp)},
  };
}

bool ModelConfig::set(const std::string& key, const std::string& v) {
  if (key == "task") task = task_from_string(v);
  else if (key == "d") d = parse_number<int>(key, v);
  else if (key == "n_layers") n_layers = parse_number<int>(key, v);
  else if (key == "n_heads") n_heads = parse_number<int>(key, v);
  else if (key == "ffn_mult") ffn_mult = parse_number<int>(key, v);
  else if (key == "d_v") d_v = parse_number<int>(key, v);
  else if (key == "l_i") l_i = parse_number<int>(key, v);
  else if (key == "max_l_t") max_l_t = parse_number<int>(key, v);
  else if (key == "max_l_cap") max_l_cap = parse_number<int>(key, v);
  else if (key == "max_target_len") max_target_len = parse_number<int>(key, v);
  else if (key == "lambda") lambda = parse_number<double>(key, v);
  else if (key == "lr") lr = parse_number<double>(key, v);
  else if (key == "lr_scale") lr_scale = parse_number<double>(key, v);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, v);
  else if (key == "emb_std") emb_std = parse_number<double>(key, v);
  else if (key == "dropout") dropout = parse_number<double>(key, v);
  else if (key == "image_dropout") image_dropout = parse_number<double>(key, v);
  else if (key == "weight_decay") weight_decay = parse_number<double>(key, v);
  else if (key == "position_width") position_width = parse_number<int>(key, v);
  else if (key == "epochs") epochs = parse_number<int>(key, v);
  else if (key == "batch_size") batch_size = parse_number<int>(key, v);
  else if (key == "model_seed") seed = parse_number<unsigned long long>(key, v);
  else if (key == "share_s_branch") share_s_branch = parse_bool(key, v);
  else if (key == "encoder_positions") encoder_positions = parse_bool(key, v);
  else if (key == "no_image") ablations.no_image = parse_bool(key, v);
  else if (key == "no_caption") ablations.no_caption = parse_bool(key, v);
  else if (key == "no_multitask") ablations.no_multitask = parse_bool(key, v);
  else if (key == "no_prompt") ablations.no_prompt = parse_bool(key, v);
  else if (key == "no_gap") ablations.no_gap = parse_bool(key, v);
  else if (key == "no_gsp") ablations.no_gsp = parse_bool(key, v);
  else if (key == "dsp") ablations.dsp = parse_bool(key, v);
  else return false;
  return true;
}

}  // namespace gmp::nn
