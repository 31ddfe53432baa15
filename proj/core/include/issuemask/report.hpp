#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/cross_validation.hpp"
#include "issuemask/provenance.hpp"

namespace issuemask {

inline constexpr std::string_view kEvalReportFormat = "issuemask-eval/1";
inline constexpr std::string_view kAblationReportFormat = "issuemask-ablation/1";

nlohmann::json to_json(const FoldMetrics& f);
FoldMetrics fold_metrics_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const StatsBlock& s);
StatsBlock stats_block_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const AblationReport& r);
AblationReport ablation_report_from_json(const nlohmann::json& j, const std::string& where);

void save_eval_report(const std::filesystem::path& path, const EvalReport& report,
                      const std::vector<ProvenanceInput>& inputs = {});
EvalReport load_eval_report(const std::filesystem::path& path);
void save_ablation_report(const std::filesystem::path& path, const AblationReport& report,
                          const std::vector<ProvenanceInput>& inputs = {});
AblationReport load_ablation_report(const std::filesystem::path& path);

/// Standalone SVG heat map of one confusion matrix.
std::string render_confusion_svg(const Confusion& confusion, const std::string& title);

/// Writes overall.svg, mask_subset.svg and cls_subset.svg into `dir`; returns the paths.
std::vector<std::filesystem::path> write_confusion_plots(const std::filesystem::path& dir,
                                                         const Decomposition& decomposition);

}  // namespace issuemask
