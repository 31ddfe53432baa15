#include "issuemask/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "issuemask/common.hpp"
#include "issuemask/hashing.hpp"

namespace issuemask {
namespace {

constexpr char kMagic[4] = {'I', 'M', 'W', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& where) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ValidationError(where, "truncated tensor file");
  return value;
}

}  // namespace

void write_tensors(const std::filesystem::path& path, const ParamStore<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.all()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(float))));
  }
  if (!out) throw Error("failed writing " + path.string());
}

void read_tensors(const std::filesystem::path& path, ParamStore<float>& params) {
  const auto where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + where);
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + 4, kMagic)) {
    throw ValidationError(where, "not an issuemask tensor file");
  }
  const auto count = get<std::uint32_t>(in, where);
  if (count != params.size()) {
    throw ValidationError(where, "expected " + std::to_string(params.size()) + " tensors, found " + std::to_string(count));
  }
  for (auto& p : params.all()) {
    const auto name_length = get<std::uint32_t>(in, where);
    if (name_length > 4096) throw ValidationError(where, "corrupt tensor name");
    std::string name(name_length, '\0');
    if (!in.read(name.data(), name_length)) throw ValidationError(where, "truncated tensor file");
    const auto rows = get<std::uint32_t>(in, where);
    const auto cols = get<std::uint32_t>(in, where);
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw ValidationError(where, "tensor '" + name + "' does not match expected '" + p.name + "' " +
                                       std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    }
    if (!in.read(reinterpret_cast<char*>(p.value.data()),
                 static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(float))))) {
      throw ValidationError(where, "truncated tensor file");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ValidationError(where, "trailing bytes after tensors");
}

nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir, std::string_view kind) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing checkpoint manifest " + path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string(), e.what());
  }
  if (manifest.value("format", "") != kCheckpointFormat) {
    throw ValidationError(path.string(), "unsupported checkpoint format");
  }
  if (manifest.value("kind", "") != kind) {
    throw ValidationError(path.string(), "expected a " + std::string(kind) + " checkpoint");
  }
  for (const char* file : {"vocab.txt", "weights.bin"}) {
    const std::string key = std::string(file) == "vocab.txt" ? "vocab_sha256" : "weights_sha256";
    if (sha256_file(dir / file) != manifest.value(key, "")) {
      throw DependencyError("checkpoint file " + (dir / file).string() + " does not match its manifest digest");
    }
  }
  return manifest;
}


}  // namespace issuemask
