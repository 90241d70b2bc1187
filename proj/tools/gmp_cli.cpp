// gmp_cli: corpus generation, few-shot sampling, training and evaluation.
//
//   gmp_cli gencorpus [--config FILE] [--set key=value ...]
//   gmp_cli sample    [--config FILE] [--quota twitter15] [--seeds 42,87,100]
//   gmp_cli train     [--config FILE] [--task jmasa] [--no-image ...]
//   gmp_cli eval      [--config FILE] [--sweep l_i:0,1,2,3,4,5,6]
//
// Exit codes: 0 ok, 1 usage or internal error, 2 config, 3 data, 4 training, 5 io.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gmp/commands.hpp"
#include "gmp/errors.hpp"

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> overrides;
};

// Flags shared by every subcommand; each one becomes a `key=value` override
// applied after the config file, in command-line order of categories.
void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config_file, "key=value config file");
  cmd->add_option("-s,--set", o.overrides, "override a config key (key=value), repeatable");
  auto value_flag = [&](const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.overrides.push_back(key + "=" + v); }, help);
  };
  value_flag("--task", "task", "jmasa | masc | mate");
  value_flag("-o,--output-dir", "output_dir", "root directory of all artifacts");
  value_flag("--corpus-dir", "corpus_dir", "corpus directory (default <output-dir>/corpus)");
  value_flag("--quota", "quota", "twitter15 | twitter17 | POS:32,NEU:64,...");
  value_flag("--seeds", "seeds", "comma-separated split seeds");
  value_flag("--runs", "runs_per_seed", "training runs per split seed");
  value_flag("--epochs", "epochs", "training epochs");
  value_flag("--lambda", "lambda", "weight of the aspect-count loss");
  value_flag("--experiment", "experiment", "experiment directory name");
  for (const char* flag : {"no_image", "no_caption", "no_multitask", "no_prompt", "no_gap", "no_gsp", "dsp"}) {
    std::string name = flag;
    std::string dashed = name;
    for (char& ch : dashed) {
      if (ch == '_') ch = '-';
    }
    cmd->add_flag_callback("--" + dashed, [&o, name] { o.overrides.push_back(name + "=true"); },
                           "ablation: " + name);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative multimodal prompt model for few-shot aspect-based sentiment analysis"};
  app.require_subcommand(1);
  Options options;

  auto* gencorpus = app.add_subcommand("gencorpus", "write a synthetic train/test corpus");
  auto* sample = app.add_subcommand("sample", "draw few-shot train/dev splits per seed");
  auto* train = app.add_subcommand("train", "train every (seed, run) and keep the best-dev checkpoint");
  auto* eval = app.add_subcommand("eval", "evaluate checkpoints and aggregate mean +- sd");
  for (auto* cmd : {gencorpus, sample, train, eval}) add_common(cmd, options);
  eval->add_option_function<std::string>(
      "--sweep", [&](const std::string& v) { options.overrides.push_back("sweep=" + v); },
      "train+evaluate over l_i:v1,v2,... or lambda:v1,v2,...");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const gmp::RunConfig config = gmp::RunConfig::load(options.config_file, options.overrides);
    if (gencorpus->parsed()) gmp::cmd_gencorpus(config, std::cout);
    if (sample->parsed()) gmp::cmd_sample(config, std::cout);
    if (train->parsed()) gmp::cmd_train(config, std::cout);
    if (eval->parsed()) gmp::cmd_eval(config, std::cout);
  } catch (const gmp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(gmp::ErrorCategory::kIo);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
