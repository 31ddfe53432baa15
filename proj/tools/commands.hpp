#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>

#include "pipeline_config.hpp"

namespace issuemask::cli {

struct Options {
  std::optional<std::uint64_t> seed;
  bool random = false;
  bool ablation = false;
  bool offline = false;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> epochs;
};

void cmd_ingest(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_preprocess(const PipelineConfig& config, const Options& options, std::ostream& log);
/// Writes the lexicon, or with --random the random keyword lists (which need the lexicon).
void cmd_mine_surrogates(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_mask(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_pretrain(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_train(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_evaluate(const PipelineConfig& config, const Options& options, std::ostream& log);
void cmd_classify(const PipelineConfig& config, const Options& options, std::ostream& log);
/// Re-checks the provenance chain of every artifact present; throws DependencyError on a break.
void cmd_verify(const PipelineConfig& config, const Options& options, std::ostream& log);

/// 0 is success; each error family has its own non-zero status.
int exit_code_for(const std::exception& error);

}  // namespace issuemask::cli
