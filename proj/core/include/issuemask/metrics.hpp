#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/classifier.hpp"
#include "issuemask/common.hpp"

namespace issuemask {

/// Rows are the true class, columns the prediction, both in kLabelOrder.
using Confusion = std::array<std::array<std::size_t, kNumLabels>, kNumLabels>;

Confusion confusion_matrix(const std::vector<Label>& truth, const std::vector<Label>& predicted);
Confusion operator+(const Confusion& a, const Confusion& b);
std::size_t total(const Confusion& c);

enum class Weighting { binary_positive, class_weighted };
std::string_view to_string(Weighting weighting);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Names of metrics whose denominator was zero (reported as 0).
  std::vector<std::string> degenerate;

  friend bool operator==(const Prf&, const Prf&) = default;
};

/// binary_positive: P = TP/(TP+FP), R = TP/(TP+FN) for `positive`.
/// class_weighted: support-weighted mean of each class's P, R and F1.
Prf compute_prf(const Confusion& confusion, Label positive, Weighting weighting);
/// Throws ValidationError on empty input.
Prf compute_prf(const std::vector<Label>& truth, const std::vector<Label>& predicted, Label positive,
                Weighting weighting);

struct Decomposition {
  Confusion overall{};
  Confusion mask_subset{};
  Confusion cls_subset{};
  Prf overall_weighted;
  Prf mask_weighted;
  Prf cls_weighted;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Partitions outcomes by decision path; mask_subset + cls_subset == overall.
Decomposition confusion_decompose(const std::vector<PredictionOutcome>& outcomes, const std::vector<Label>& truths);

nlohmann::json to_json(const Confusion& c);
Confusion confusion_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const Prf& prf);
Prf prf_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace issuemask
