#include "issuemask/provenance.hpp"

#include <algorithm>
#include <fstream>

#include "issuemask/common.hpp"
#include "issuemask/hashing.hpp"

namespace fs = std::filesystem;

namespace issuemask {
namespace {

constexpr std::string_view kSidecarSuffix = ".prov.json";

bool is_sidecar(const fs::path& p) {
  const auto name = p.filename().string();
  return name.size() > kSidecarSuffix.size() &&
         name.compare(name.size() - kSidecarSuffix.size(), kSidecarSuffix.size(), kSidecarSuffix) == 0;
}

fs::path artifact_dir(const fs::path& artifact) {
  auto parent = fs::absolute(artifact).lexically_normal().parent_path();
  return parent;
}

}  // namespace

fs::path sidecar_path(const fs::path& artifact) {
  auto normalized = artifact.lexically_normal();
  if (!normalized.has_filename()) normalized = normalized.parent_path();
  return fs::path(normalized.string() + std::string(kSidecarSuffix));
}

std::string artifact_digest(const fs::path& artifact) {
  if (!fs::exists(artifact)) throw DependencyError("artifact not found: " + artifact.string());
  if (!fs::is_directory(artifact)) return sha256_file(artifact);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(artifact)) {
    if (entry.is_regular_file() && !is_sidecar(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Sha256 hasher;
  for (const auto& file : files) {
    const auto rel = fs::relative(file, artifact).generic_string();
    hasher.update(rel);
    hasher.update(std::string_view("\0", 1));
    hasher.update(sha256_file(file));
    hasher.update(std::string_view("\n", 1));
  }
  return hasher.hex_digest();
}

ProvenanceInput hash_input(std::string role, const fs::path& input, const fs::path& artifact) {
  ProvenanceInput rec;
  rec.role = std::move(role);
  rec.sha256 = artifact_digest(input);
  std::error_code ec;
  auto rel = fs::relative(fs::absolute(input), artifact_dir(artifact), ec);
  rec.path = (ec || rel.empty()) ? fs::absolute(input).generic_string() : rel.generic_string();
  return rec;
}

void write_provenance(const fs::path& artifact, Provenance provenance) {
  provenance.sha256 = artifact_digest(artifact);
  nlohmann::json doc;
  doc["format"] = kProvenanceFormat;
  doc["artifact"] = provenance.artifact;
  doc["sha256"] = provenance.sha256;
  doc["inputs"] = nlohmann::json::array();
  for (const auto& in : provenance.inputs) {
    doc["inputs"].push_back({{"role", in.role}, {"path", in.path}, {"sha256", in.sha256}});
  }
  doc["meta"] = provenance.meta;
  std::ofstream out(sidecar_path(artifact), std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write provenance for " + artifact.string());
  out << doc.dump(2) << '\n';
}

Provenance read_provenance(const fs::path& artifact) {
  const auto side = sidecar_path(artifact);
  std::ifstream in(side, std::ios::binary);
  if (!in) throw DependencyError("missing provenance record " + side.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(side.string(), e.what());
  }
  if (doc.value("format", "") != kProvenanceFormat) {
    throw ValidationError(side.string(), "unsupported provenance format");
  }
  Provenance prov;
  prov.artifact = doc.at("artifact").get<std::string>();
  prov.sha256 = doc.at("sha256").get<std::string>();
  for (const auto& in_rec : doc.at("inputs")) {
    prov.inputs.push_back({in_rec.at("role").get<std::string>(), in_rec.at("path").get<std::string>(),
                           in_rec.at("sha256").get<std::string>()});
  }
  prov.meta = doc.value("meta", nlohmann::json::object());
  return prov;
}

std::vector<std::string> verify_provenance(const fs::path& artifact) {
  std::vector<std::string> problems;
  if (!fs::exists(artifact)) {
    problems.push_back(artifact.string() + ": missing");
    return problems;
  }
  Provenance prov;
  try {
    prov = read_provenance(artifact);
  } catch (const Error& e) {
    problems.push_back(e.what());
    return problems;
  }
  if (artifact_digest(artifact) != prov.sha256) {
    problems.push_back(artifact.string() + ": content changed since it was written");
  }
  const auto base = artifact_dir(artifact);
  for (const auto& in : prov.inputs) {
    fs::path p(in.path);
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) {
      problems.push_back(artifact.string() + ": input '" + in.role + "' missing at " + p.string());
      continue;
    }
    if (artifact_digest(p) != in.sha256) {
      problems.push_back(artifact.string() + ": stale, input '" + in.role + "' (" + p.string() +
                         ") changed");
    }
  }
  return problems;
}

void require_fresh(const fs::path& artifact, std::string_view role) {
  if (!fs::exists(artifact)) {
    throw DependencyError("missing upstream artifact '" + std::string(role) + "' at " + artifact.string());
  }
  const auto problems = verify_provenance(artifact);
  if (!problems.empty()) {
    throw DependencyError("upstream artifact '" + std::string(role) + "' is not usable: " + problems.front());
  }
}

}  // namespace issuemask
