#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace issuemask {

/// Binary issue class. The enumerator order is the classifier's fixed label order.
enum class Label : std::uint8_t { security = 0, non_security = 1 };

inline constexpr std::array<Label, 2> kLabelOrder{Label::security, Label::non_security};
inline constexpr std::size_t kNumLabels = kLabelOrder.size();

std::string_view to_string(Label label);
Label parse_label(std::string_view text);
std::optional<Label> try_parse_label(std::string_view text);
inline std::size_t label_index(Label label) { return static_cast<std::size_t>(label); }
inline Label other(Label label) {
  return label == Label::security ? Label::non_security : Label::security;
}

// Error hierarchy. Every error contract in the pipeline maps onto one of these.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CredentialError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

/// A sampling request could not be met from the available pool.
class ShortfallError : public Error {
 public:
  using Error::Error;
};

/// Statistical input without enough variation for the test to be defined.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// An upstream artifact is missing, stale, or has been modified.
class DependencyError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or file content. `where()` names the offending path.
class ValidationError : public Error {
 public:
  ValidationError(std::string where, const std::string& message)
      : Error(where.empty() ? message : where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// A required language-processing backend is not available.
class BackendUnavailableError : public Error {
 public:
  using Error::Error;
};

}  // namespace issuemask
