#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace capcurate {

// Incremental SHA-256. Digests are rendered as "sha256:<hex>" so the
// algorithm travels with the value.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  void update(std::string_view bytes);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::string_view kChecksumAlgorithm = "sha256";

std::string checksum_bytes(std::string_view bytes);
std::string checksum_file(const std::filesystem::path& path);

// Non-cryptographic 64-bit hash (FNV-1a folded through splitmix64); stable
// across platforms and runs, used for seeded selection and blinding.
std::uint64_t stable_hash64(std::string_view text, std::uint64_t seed = 0) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace capcurate
