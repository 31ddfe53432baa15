#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace issuemask {

/// Coarse part of speech, as consumed by the lemmatizer.
enum class Pos { noun, verb, adjective, adverb, other };

std::string_view to_string(Pos pos);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  /// One tag per token; tokens are lowercase words as produced by normalize().
  virtual std::vector<Pos> tag(const std::vector<std::string>& tokens) const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic tagger built from closed-class word lists, irregular-form
/// tables, suffix rules, and a one-token window of left/right context.
class RuleBasedTagger final : public PosTagger {
 public:
  std::vector<Pos> tag(const std::vector<std::string>& tokens) const override;
  std::string name() const override { return "rule-v1"; }
};

/// Looks up a tagger backend by name ("rule-v1"). Throws BackendUnavailableError otherwise.
std::unique_ptr<PosTagger> make_pos_tagger(std::string_view name);

}  // namespace issuemask
