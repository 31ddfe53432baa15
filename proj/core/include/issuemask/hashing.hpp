#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace issuemask {

/// Incremental SHA-256 (OpenSSL EVP). Digests are lowercase hex.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  Sha256& update(const void* data, std::size_t size);
  std::string hex_digest();

 private:
  void* ctx_;
  bool finished_ = false;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace issuemask
