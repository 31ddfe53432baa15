#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace issuemask::cli;

int main(int argc, char** argv) {
  CLI::App app{"issuemask: security issue classification with surrogate-keyword masking"};
  app.require_subcommand(1);

  std::string config_file;
  Options options;
  app.add_option("-c,--config", config_file, "pipeline configuration (JSON)")->required();

  struct Entry {
    const char* name;
    const char* help;
    void (*run)(const PipelineConfig&, const Options&, std::ostream&);
  };
  const Entry entries[] = {
      {"ingest", "fetch and balance the labeled corpus", cmd_ingest},
      {"preprocess", "normalize, lemmatize and filter issue text", cmd_preprocess},
      {"mine-surrogates", "mine per-class keyword lists with RAKE", cmd_mine_surrogates},
      {"mask", "mask keyword occurrences", cmd_mask},
      {"pretrain", "pretrain the encoder with a masked-language objective", cmd_pretrain},
      {"train", "fine-tune the classifier on masked instances", cmd_train},
      {"evaluate", "k-fold cross-validation, or the surrogate/random ablation", cmd_evaluate},
      {"classify", "label new issues with a trained checkpoint", cmd_classify},
      {"verify", "check provenance of every artifact", cmd_verify},
  };

  std::optional<std::string> input, checkpoint, out;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->fallthrough();
    sub->add_option("--seed", options.seed, "override the configured seed");
    sub->add_option("--out", out, "override the output path");
    sub->add_option("--epochs", options.epochs, "override the number of epochs");
    const std::string name = e.name;
    if (name == "mine-surrogates" || name == "mask" || name == "train" || name == "evaluate") {
      sub->add_flag("--random", options.random, "use the random keyword lists");
    }
    if (name == "ingest") sub->add_flag("--offline", options.offline, "read responses from the fixture directory");
    if (name == "evaluate") {
      sub->add_flag("--ablation", options.ablation, "run surrogate and random conditions over every seed");
      sub->add_option("--folds", options.folds, "override the number of folds");
    }
    if (name == "classify") {
      sub->add_option("--input", input, "corpus JSONL to classify")->required();
      sub->add_option("--checkpoint", checkpoint, "classifier checkpoint directory");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (input) options.input = *input;
  if (checkpoint) options.checkpoint = *checkpoint;
  if (out) options.out = *out;

  try {
    const auto config = PipelineConfig::load(config_file);
    for (const auto& e : entries) {
      if (app.got_subcommand(e.name)) e.run(config, options, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
