#include "issuemask/masking.hpp"

#include <set>

#include "issuemask/jsonl.hpp"

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

MaskedInstance mask_with(const PreprocessedIssue& issue, const std::set<std::string>& own, Label pseudo) {
  MaskedInstance out;
  out.issue_id = issue.issue_id;
  out.truth_label = issue.label;
  out.tokens = issue.tokens;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (!own.contains(out.tokens[i])) continue;
    out.masked_tokens.push_back(std::move(out.tokens[i]));
    out.tokens[i] = std::string(kMaskToken);
    out.mask_positions.push_back(i);
    out.pseudo_labels.push_back(pseudo);
  }
  out.decision_hint = out.mask_positions.empty() ? DecisionHint::cls_only : DecisionHint::has_masks;
  return out;
}

const PreprocessedIssue& require_label(const PreprocessedIssue& issue) {
  if (!issue.label) throw ValidationError(issue.issue_id, "own-class masking needs a labeled issue");
  return issue;
}

}  // namespace

std::string_view to_string(DecisionHint hint) { return hint == DecisionHint::has_masks ? "has_masks" : "cls_only"; }

std::vector<std::string> MaskedInstance::unmasked() const {
  auto out = tokens;
  for (std::size_t m = 0; m < mask_positions.size() && m < masked_tokens.size(); ++m) {
    out[mask_positions[m]] = masked_tokens[m];
  }
  return out;
}

void MaskedInstance::validate(const std::string& where) const {
  if (mask_positions.size() != pseudo_labels.size()) {
    throw ValidationError(where, "mask_positions and pseudo_labels differ in length");
  }
  if ((decision_hint == DecisionHint::cls_only) != mask_positions.empty()) {
    throw ValidationError(where, "decision_hint disagrees with mask_positions");
  }
  std::size_t m = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool listed = m < mask_positions.size() && mask_positions[m] == i;
    if ((tokens[i] == kMaskToken) != listed) throw ValidationError(where, "mask sentinel at unlisted position");
    if (listed) ++m;
  }
  if (m != mask_positions.size()) throw ValidationError(where, "mask_positions must be increasing token indices");
  if (truth_label) {
    for (auto label : pseudo_labels) {
      if (label != *truth_label) throw ValidationError(where, "pseudo-label differs from truth_label");
    }
  }
}

MaskedInstance apply_masks(const PreprocessedIssue& issue, const SurrogateLexicon& lexicon) {
  const auto label = *require_label(issue).label;
  return mask_with(issue, lexicon.keywords(label), label);
}

MaskedInstance apply_random_masks(const PreprocessedIssue& issue, const RandomKeywordLists& random_lists) {
  return apply_masks(issue, random_lists);
}

MaskedInstance apply_masks_unlabeled(const PreprocessedIssue& issue, const SurrogateLexicon& lexicon) {
  const auto security = lexicon.keywords(Label::security);
  const auto non_security = lexicon.keywords(Label::non_security);
  MaskedInstance out;
  out.issue_id = issue.issue_id;
  out.tokens = issue.tokens;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    const bool sec = security.contains(out.tokens[i]);
    if (!sec && !non_security.contains(out.tokens[i])) continue;
    out.masked_tokens.push_back(std::move(out.tokens[i]));
    out.tokens[i] = std::string(kMaskToken);
    out.mask_positions.push_back(i);
    out.pseudo_labels.push_back(sec ? Label::security : Label::non_security);
  }
  out.decision_hint = out.mask_positions.empty() ? DecisionHint::cls_only : DecisionHint::has_masks;
  return out;
}

json to_json(const MaskedInstance& instance) {
  json labels = json::array();
  for (auto l : instance.pseudo_labels) labels.push_back(std::string(to_string(l)));
  return {{"issue_id", instance.issue_id},
          {"tokens", instance.tokens},
          {"mask_positions", instance.mask_positions},
          {"pseudo_labels", labels},
          {"truth_label", instance.truth_label ? json(std::string(to_string(*instance.truth_label))) : json(nullptr)},
          {"decision_hint", std::string(to_string(instance.decision_hint))}};
}

MaskedInstance masked_from_json(const json& record, const std::string& where) {
  require_exact_keys(record, {"issue_id", "tokens", "mask_positions", "pseudo_labels", "truth_label", "decision_hint"},
                     where);
  MaskedInstance instance;
  instance.issue_id = record.at("issue_id").get<std::string>();
  instance.tokens = record.at("tokens").get<std::vector<std::string>>();
  instance.mask_positions = record.at("mask_positions").get<std::vector<std::size_t>>();
  for (const auto& l : record.at("pseudo_labels")) instance.pseudo_labels.push_back(parse_label(l.get<std::string>()));
  if (!record.at("truth_label").is_null()) instance.truth_label = parse_label(record.at("truth_label").get<std::string>());
  const auto hint = record.at("decision_hint").get<std::string>();
  if (hint == "has_masks") {
    instance.decision_hint = DecisionHint::has_masks;
  } else if (hint == "cls_only") {
    instance.decision_hint = DecisionHint::cls_only;
  } else {
    throw ValidationError(where, "unknown decision_hint '" + hint + "'");
  }
  for (auto p : instance.mask_positions) {
    if (p >= instance.tokens.size()) throw ValidationError(where, "mask position out of range");
  }
  instance.validate(where);
  return instance;
}

void save_masked(const fs::path& path, const std::vector<MaskedInstance>& instances,
                 const std::vector<ProvenanceInput>& inputs, const json& meta) {
  JsonlWriter writer(path);
  for (const auto& instance : instances) writer.write(to_json(instance));
  writer.close();
  Provenance prov;
  prov.artifact = "masked";
  prov.inputs = inputs;
  prov.meta = meta.is_object() ? meta : json::object();
  write_provenance(path, std::move(prov));
}

std::vector<MaskedInstance> load_masked(const fs::path& path) {
  std::vector<MaskedInstance> out;
  std::set<std::string> ids;
  for_each_jsonl(path, [&](const json& record, std::size_t line) {
    const auto where = path.string() + ":" + std::to_string(line);
    auto instance = masked_from_json(record, where);
    if (!ids.insert(instance.issue_id).second) throw ValidationError(where, "duplicate issue_id " + instance.issue_id);
    out.push_back(std::move(instance));
  });
  return out;
}

}  // namespace issuemask
