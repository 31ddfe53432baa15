#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/classifier.hpp"
#include "issuemask/corpus.hpp"
#include "issuemask/issue_source.hpp"
#include "issuemask/preprocess.hpp"
#include "issuemask/pretrain.hpp"
#include "issuemask/synthetic.hpp"

namespace issuemask::cli {

inline constexpr int kSchemaVersion = 1;

struct Paths {
  std::filesystem::path corpus;
  std::filesystem::path preprocessed;
  std::filesystem::path lexicon;
  std::filesystem::path random_lists;
  std::filesystem::path masked;
  std::filesystem::path masked_random;
  std::filesystem::path pretrained;
  std::filesystem::path checkpoint;
  std::filesystem::path report;
  std::filesystem::path ablation_report;
  std::filesystem::path predictions;
  std::filesystem::path plots;
};

struct IngestSection {
  std::string source = "github";  // "github" or "synthetic"
  std::string api_base = "https://api.github.com";
  std::optional<std::filesystem::path> fixtures;
  std::map<Label, std::vector<std::string>> queries;
  std::size_t quota_per_query = 100;
  std::size_t per_class = 0;  // required for the github source
  std::uint64_t seed = 0;
  IssueFilter filter;
  std::set<std::string> core_tags = SecurityTagSet::core_tags();
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::filesystem::path> tag_allow;
  std::optional<std::filesystem::path> tag_deny;
  ProjectFilter project_filter;
  std::string reference_date;
};

struct SurrogateSection {
  std::size_t k = 50;
  std::optional<std::filesystem::path> allow;
  std::optional<std::filesystem::path> deny;
  std::uint64_t random_seed = 0;
};

struct PretrainSection {
  PretrainConfig config;
  // "synthetic" generates text with the synthetic generator, "corpus" reuses the
  // preprocessed corpus without labels, anything else is a text file, one document per line.
  std::string text = "synthetic";
  std::size_t synthetic_documents = 2000;
};

struct EvaluateSection {
  std::size_t folds = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double alpha = 0.05;
  double threshold = 0.5;
  bool plots = true;
};

struct PipelineConfig {
  int schema_version = kSchemaVersion;
  std::filesystem::path source_file;
  std::filesystem::path base_dir;
  Paths paths;
  IngestSection ingest;
  SyntheticConfig synthetic;
  PreprocessConfig preprocess;
  SurrogateSection surrogates;
  PretrainSection pretrain;
  TrainConfig train;
  EvaluateSection evaluate;

  /// Parses and validates. Relative paths resolve against the file's directory.
  /// Unknown keys and missing referenced input files raise ValidationError.
  static PipelineConfig load(const std::filesystem::path& file);
  static PipelineConfig parse(const nlohmann::json& doc, const std::filesystem::path& base_dir);
};

}  // namespace issuemask::cli
