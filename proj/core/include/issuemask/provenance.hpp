#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace issuemask {

struct ProvenanceInput {
  std::string role;
  std::string path;  // relative to the artifact's directory when possible
  std::string sha256;

  friend bool operator==(const ProvenanceInput&, const ProvenanceInput&) = default;
};

/// Sidecar record written next to every pipeline artifact as `<artifact>.prov.json`.
///
/// The record pins the artifact's own content hash and the hash of every input
/// it was derived from, so staleness is detected by content, not timestamps.
struct Provenance {
  std::string artifact;  // kind: corpus, preprocessed, lexicon, ...
  std::string sha256;
  std::vector<ProvenanceInput> inputs;
  nlohmann::json meta = nlohmann::json::object();
};

inline constexpr std::string_view kProvenanceFormat = "issuemask-provenance/1";

std::filesystem::path sidecar_path(const std::filesystem::path& artifact);

/// File content hash, or for a directory a hash over its sorted file list.
std::string artifact_digest(const std::filesystem::path& artifact);

ProvenanceInput hash_input(std::string role, const std::filesystem::path& input,
                           const std::filesystem::path& artifact);

/// Computes the artifact digest and writes the sidecar.
void write_provenance(const std::filesystem::path& artifact, Provenance provenance);

Provenance read_provenance(const std::filesystem::path& artifact);

/// Empty when the artifact, its sidecar, and every recorded input still agree.
std::vector<std::string> verify_provenance(const std::filesystem::path& artifact);

/// Throws DependencyError naming `role` when the artifact is missing or stale.
void require_fresh(const std::filesystem::path& artifact, std::string_view role);

}  // namespace issuemask
