#include "issuemask/metrics.hpp"

namespace issuemask {
using nlohmann::json;

Confusion confusion_matrix(const std::vector<Label>& truth, const std::vector<Label>& predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("confusion_matrix", "truth and predictions differ in length");
  Confusion c{};
  for (std::size_t i = 0; i < truth.size(); ++i) ++c[label_index(truth[i])][label_index(predicted[i])];
  return c;
}

Confusion operator+(const Confusion& a, const Confusion& b) {
  Confusion c{};
  for (std::size_t r = 0; r < kNumLabels; ++r) {
    for (std::size_t k = 0; k < kNumLabels; ++k) c[r][k] = a[r][k] + b[r][k];
  }
  return c;
}

std::size_t total(const Confusion& c) {
  std::size_t n = 0;
  for (const auto& row : c) {
    for (auto v : row) n += v;
  }
  return n;
}

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::binary_positive ? "binary_positive" : "class_weighted";
}

namespace {

double ratio(std::size_t num, std::size_t den, const char* name, std::vector<std::string>& degenerate) {
  if (den == 0) {
    degenerate.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

Prf class_prf(const Confusion& c, std::size_t k) {
  Prf out;
  std::size_t predicted = 0;
  std::size_t actual = 0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    predicted += c[i][k];
    actual += c[k][i];
  }
  out.precision = ratio(c[k][k], predicted, "precision", out.degenerate);
  out.recall = ratio(c[k][k], actual, "recall", out.degenerate);
  if (out.precision + out.recall == 0.0) {
    out.degenerate.emplace_back("f1");
    out.f1 = 0.0;
  } else {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

}  // namespace

Prf compute_prf(const Confusion& confusion, Label positive, Weighting weighting) {
  const auto n = total(confusion);
  if (n == 0) throw ValidationError("compute_prf", "no outcomes");
  if (weighting == Weighting::binary_positive) return class_prf(confusion, label_index(positive));

  Prf out;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    std::size_t support = 0;
    for (std::size_t j = 0; j < kNumLabels; ++j) support += confusion[k][j];
    const auto per_class = class_prf(confusion, k);
    const double w = static_cast<double>(support) / static_cast<double>(n);
    out.precision += w * per_class.precision;
    out.recall += w * per_class.recall;
    out.f1 += w * per_class.f1;
    if (support > 0) {
      for (const auto& name : per_class.degenerate) {
        out.degenerate.push_back(std::string(to_string(kLabelOrder[k])) + "." + name);
      }
    }
  }
  return out;
}

Prf compute_prf(const std::vector<Label>& truth, const std::vector<Label>& predicted, Label positive,
                Weighting weighting) {
  if (truth.empty()) throw ValidationError("compute_prf", "no outcomes");
  return compute_prf(confusion_matrix(truth, predicted), positive, weighting);
}

Decomposition confusion_decompose(const std::vector<PredictionOutcome>& outcomes, const std::vector<Label>& truths) {
  if (outcomes.size() != truths.size()) throw ValidationError("confusion_decompose", "outcomes and truths differ in length");
  Decomposition d;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& subset = outcomes[i].decision_path == DecisionPath::mask_vote ? d.mask_subset : d.cls_subset;
    ++subset[label_index(truths[i])][label_index(outcomes[i].final_label)];
  }
  d.overall = d.mask_subset + d.cls_subset;
  auto weighted = [](const Confusion& c) {
    return total(c) == 0 ? Prf{0, 0, 0, {"empty"}} : compute_prf(c, Label::security, Weighting::class_weighted);
  };
  d.overall_weighted = weighted(d.overall);
  d.mask_weighted = weighted(d.mask_subset);
  d.cls_weighted = weighted(d.cls_subset);
  return d;
}

json to_json(const Confusion& c) {
  json rows = json::array();
  for (const auto& row : c) rows.push_back(row);
  return rows;
}

Confusion confusion_from_json(const json& j, const std::string& where) {
  Confusion c{};
  if (!j.is_array() || j.size() != kNumLabels) throw ValidationError(where, "confusion must be a 2x2 array");
  for (std::size_t r = 0; r < kNumLabels; ++r) {
    if (!j[r].is_array() || j[r].size() != kNumLabels) throw ValidationError(where, "confusion must be a 2x2 array");
    for (std::size_t k = 0; k < kNumLabels; ++k) c[r][k] = j[r][k].get<std::size_t>();
  }
  return c;
}

json to_json(const Prf& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}, {"degenerate", prf.degenerate}};
}

Prf prf_from_json(const json& j, const std::string& where) {
  try {
    return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
            j.at("degenerate").get<std::vector<std::string>>()};
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
}

json to_json(const Decomposition& d) {
  return {{"overall", {{"confusion", to_json(d.overall)}, {"weighted", to_json(d.overall_weighted)}}},
          {"mask_subset", {{"confusion", to_json(d.mask_subset)}, {"weighted", to_json(d.mask_weighted)}}},
          {"cls_subset", {{"confusion", to_json(d.cls_subset)}, {"weighted", to_json(d.cls_weighted)}}}};
}

Decomposition decomposition_from_json(const json& j, const std::string& where) {
  Decomposition d;
  try {
    d.overall = confusion_from_json(j.at("overall").at("confusion"), where + ".overall");
    d.mask_subset = confusion_from_json(j.at("mask_subset").at("confusion"), where + ".mask_subset");
    d.cls_subset = confusion_from_json(j.at("cls_subset").at("confusion"), where + ".cls_subset");
    d.overall_weighted = prf_from_json(j.at("overall").at("weighted"), where + ".overall");
    d.mask_weighted = prf_from_json(j.at("mask_subset").at("weighted"), where + ".mask_subset");
    d.cls_weighted = prf_from_json(j.at("cls_subset").at("weighted"), where + ".cls_subset");
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
  return d;
}

}  // namespace issuemask
