#include "issuemask/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
auto guarded(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
}

void check_format(const json& j, std::string_view format, const std::string& where) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format) {
    throw ValidationError(where, "expected format " + std::string(format));
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string(), e.what());
  }
}

json summary_json(const std::map<std::string, MetricSummary>& summary) {
  json j = json::object();
  for (const auto& [k, v] : summary) j[k] = {{"mean", v.mean}, {"std", v.std}};
  return j;
}

std::map<std::string, MetricSummary> summary_from_json(const json& j) {
  std::map<std::string, MetricSummary> out;
  for (const auto& [k, v] : j.items()) out[k] = {v.at("mean").get<double>(), v.at("std").get<double>()};
  return out;
}

}  // namespace

json to_json(const FoldMetrics& f) {
  return {{"fold_index", f.fold_index},
          {"precision", f.weighted.precision},
          {"recall", f.weighted.recall},
          {"f1", f.weighted.f1},
          {"weighted", to_json(f.weighted)},
          {"binary", to_json(f.binary)},
          {"confusion", to_json(f.confusion)},
          {"validation_ids", f.validation_ids},
          {"train_size", f.train_size},
          {"initial_weights_digest", f.initial_weights_digest},
          {"epoch_losses", f.epoch_losses}};
}

FoldMetrics fold_metrics_from_json(const json& j, const std::string& where) {
  return guarded(where, [&] {
    FoldMetrics f;
    f.fold_index = j.at("fold_index").get<std::size_t>();
    f.weighted = prf_from_json(j.at("weighted"), where + ".weighted");
    f.binary = prf_from_json(j.at("binary"), where + ".binary");
    f.confusion = confusion_from_json(j.at("confusion"), where + ".confusion");
    f.validation_ids = j.at("validation_ids").get<std::vector<std::string>>();
    f.train_size = j.at("train_size").get<std::size_t>();
    f.initial_weights_digest = j.at("initial_weights_digest").get<std::string>();
    f.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    if (j.at("precision").get<double>() != f.weighted.precision || j.at("recall").get<double>() != f.weighted.recall ||
        j.at("f1").get<double>() != f.weighted.f1) {
      throw ValidationError(where, "headline metrics disagree with the weighted block");
    }
    return f;
  });
}

json to_json(const StatsBlock& s) {
  json comparisons = json::array();
  for (const auto& c : s.comparisons) comparisons.push_back(to_json(c));
  json ratios = json::object();
  for (const auto& [metric, r] : s.variance_ratios) {
    ratios[metric] = {{"f", r.f}, {"p_two_sided", r.p_two_sided}, {"df_num", r.df_num}, {"df_den", r.df_den}};
  }
  return {{"alpha", s.alpha},
          {"hypotheses", s.hypotheses},
          {"threshold", s.threshold},
          {"comparisons", comparisons},
          {"variance_ratios", ratios}};
}

StatsBlock stats_block_from_json(const json& j, const std::string& where) {
  return guarded(where, [&] {
    StatsBlock s;
    s.alpha = j.at("alpha").get<double>();
    s.hypotheses = j.at("hypotheses").get<int>();
    s.threshold = j.at("threshold").get<double>();
    for (const auto& c : j.at("comparisons")) s.comparisons.push_back(paired_comparison_from_json(c, where));
    for (const auto& [metric, r] : j.at("variance_ratios").items()) {
      s.variance_ratios[metric] = {r.at("f").get<double>(), r.at("p_two_sided").get<double>(),
                                   r.at("df_num").get<double>(), r.at("df_den").get<double>()};
    }
    return s;
  });
}

json to_json(const EvalReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  return {{"format", kEvalReportFormat},
          {"condition", r.condition},
          {"folds", folds},
          {"summary", summary_json(r.summary)},
          {"decomposition", to_json(r.decomposition)},
          {"stats", r.stats ? to_json(*r.stats) : json(nullptr)},
          {"config", r.config}};
}

EvalReport eval_report_from_json(const json& j, const std::string& where) {
  check_format(j, kEvalReportFormat, where);
  return guarded(where, [&] {
    EvalReport r;
    r.condition = j.at("condition").get<std::string>();
    for (std::size_t i = 0; i < j.at("folds").size(); ++i) {
      r.folds.push_back(fold_metrics_from_json(j["folds"][i], where + ".folds[" + std::to_string(i) + "]"));
    }
    r.summary = summary_from_json(j.at("summary"));
    r.decomposition = decomposition_from_json(j.at("decomposition"), where + ".decomposition");
    if (!j.at("stats").is_null()) r.stats = stats_block_from_json(j["stats"], where + ".stats");
    r.config = j.at("config");
    return r;
  });
}

json to_json(const AblationReport& r) {
  json sur = json::array();
  json rnd = json::array();
  for (const auto& e : r.surrogate) sur.push_back(to_json(e));
  for (const auto& e : r.random) rnd.push_back(to_json(e));
  return {{"format", kAblationReportFormat},
          {"seeds", r.seeds},
          {"surrogate", sur},
          {"random", rnd},
          {"surrogate_mean", r.surrogate_mean},
          {"random_mean", r.random_mean},
          {"stats", to_json(r.stats)}};
}

AblationReport ablation_report_from_json(const json& j, const std::string& where) {
  check_format(j, kAblationReportFormat, where);
  return guarded(where, [&] {
    AblationReport r;
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& e : j.at("surrogate")) r.surrogate.push_back(eval_report_from_json(e, where + ".surrogate"));
    for (const auto& e : j.at("random")) r.random.push_back(eval_report_from_json(e, where + ".random"));
    r.surrogate_mean = j.at("surrogate_mean").get<std::map<std::string, double>>();
    r.random_mean = j.at("random_mean").get<std::map<std::string, double>>();
    r.stats = stats_block_from_json(j.at("stats"), where + ".stats");
    return r;
  });
}

void save_eval_report(const fs::path& path, const EvalReport& report, const std::vector<ProvenanceInput>& inputs) {
  write_json(path, to_json(report));
  write_provenance(path, Provenance{"eval_report", "", inputs, {{"condition", report.condition}}});
}

EvalReport load_eval_report(const fs::path& path) { return eval_report_from_json(read_json(path), path.string()); }

void save_ablation_report(const fs::path& path, const AblationReport& report,
                          const std::vector<ProvenanceInput>& inputs) {
  write_json(path, to_json(report));
  write_provenance(path, Provenance{"ablation_report", "", inputs, {{"seeds", report.seeds}}});
}

AblationReport load_ablation_report(const fs::path& path) {
  return ablation_report_from_json(read_json(path), path.string());
}

std::string render_confusion_svg(const Confusion& confusion, const std::string& title) {
  constexpr int cell = 120;
  constexpr int left = 130;
  constexpr int top = 70;
  std::size_t peak = 1;
  for (const auto& row : confusion) {
    for (auto v : row) peak = std::max(peak, v);
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + 2 * cell + 20 << "\" height=\""
      << top + 2 * cell + 50 << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "  <text x=\"" << left + cell << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  svg << "  <text x=\"" << left + cell << "\" y=\"50\" text-anchor=\"middle\">predicted</text>\n";
  svg << "  <text x=\"20\" y=\"" << top + cell << "\" transform=\"rotate(-90 20 " << top + cell
      << ")\" text-anchor=\"middle\">true</text>\n";
  for (std::size_t r = 0; r < kNumLabels; ++r) {
    const auto name = to_string(kLabelOrder[r]);
    svg << "  <text x=\"" << left - 8 << "\" y=\"" << top + static_cast<int>(r) * cell + cell / 2
        << "\" text-anchor=\"end\">" << name << "</text>\n";
    svg << "  <text x=\"" << left + static_cast<int>(r) * cell + cell / 2 << "\" y=\"" << top + 2 * cell + 20
        << "\" text-anchor=\"middle\">" << name << "</text>\n";
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      const double level = static_cast<double>(confusion[r][c]) / static_cast<double>(peak);
      const int shade = 255 - static_cast<int>(level * 180.0);
      const int x = left + static_cast<int>(c) * cell;
      const int y = top + static_cast<int>(r) * cell;
      svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"rgb(" << shade << "," << shade << ",255)\" stroke=\"#333\"/>\n";
      svg << "  <text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 5 << "\" text-anchor=\"middle\""
          << " font-size=\"18\">" << confusion[r][c] << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<fs::path> write_confusion_plots(const fs::path& dir, const Decomposition& decomposition) {
  fs::create_directories(dir);
  const std::array<std::pair<const char*, const Confusion*>, 3> plots{{{"overall", &decomposition.overall},
                                                                       {"mask_subset", &decomposition.mask_subset},
                                                                       {"cls_subset", &decomposition.cls_subset}}};
  std::vector<fs::path> out;
  for (const auto& [name, matrix] : plots) {
    const auto path = dir / (std::string(name) + ".svg");
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + path.string());
    file << render_confusion_svg(*matrix, name);
    out.push_back(path);
  }
  return out;
}

}  // namespace issuemask
