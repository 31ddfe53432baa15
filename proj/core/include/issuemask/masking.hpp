#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/preprocess.hpp"
#include "issuemask/provenance.hpp"
#include "issuemask/surrogates.hpp"

namespace issuemask {

inline constexpr std::string_view kMaskToken = "[MASK]";

enum class DecisionHint { has_masks, cls_only };
std::string_view to_string(DecisionHint hint);

struct MaskedInstance {
  std::string issue_id;
  std::vector<std::string> tokens;
  std::vector<std::size_t> mask_positions;
  std::vector<Label> pseudo_labels;
  std::optional<Label> truth_label;  // unset only for unlabeled inference input
  DecisionHint decision_hint = DecisionHint::cls_only;
  // Original tokens at mask_positions. In memory only: the file format has no
  // field for them, so equality ignores them.
  std::vector<std::string> masked_tokens;

  /// The token stream with every mask replaced by the word it hid.
  std::vector<std::string> unmasked() const;
  void validate(const std::string& where) const;

  bool operator==(const MaskedInstance& o) const {
    return issue_id == o.issue_id && tokens == o.tokens && mask_positions == o.mask_positions &&
           pseudo_labels == o.pseudo_labels && truth_label == o.truth_label && decision_hint == o.decision_hint;
  }
};

/// Masks every token that equals a keyword of the issue's own class.
MaskedInstance apply_masks(const PreprocessedIssue& issue, const SurrogateLexicon& lexicon);

/// Same contract with the random list of the issue's class.
MaskedInstance apply_random_masks(const PreprocessedIssue& issue, const RandomKeywordLists& random_lists);

/// For issues without a label: masks keywords of either class; each mask's
/// pseudo-label is the class whose list contains the keyword.
MaskedInstance apply_masks_unlabeled(const PreprocessedIssue& issue, const SurrogateLexicon& lexicon);

nlohmann::json to_json(const MaskedInstance& instance);
MaskedInstance masked_from_json(const nlohmann::json& record, const std::string& where);

void save_masked(const std::filesystem::path& path, const std::vector<MaskedInstance>& instances,
                 const std::vector<ProvenanceInput>& inputs = {}, const nlohmann::json& meta = {});
std::vector<MaskedInstance> load_masked(const std::filesystem::path& path);

}  // namespace issuemask
