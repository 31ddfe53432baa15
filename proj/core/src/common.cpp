#include "issuemask/common.hpp"

namespace issuemask {

std::string_view to_string(Label label) {
  return label == Label::security ? "security" : "non_security";
}

std::optional<Label> try_parse_label(std::string_view text) {
  if (text == "security") return Label::security;
  if (text == "non_security") return Label::non_security;
  return std::nullopt;
}

Label parse_label(std::string_view text) {
  if (auto label = try_parse_label(text)) return *label;
  throw ValidationError("label", "expected \"security\" or \"non_security\", got \"" +
                                     std::string(text) + "\"");
}

}  // namespace issuemask
