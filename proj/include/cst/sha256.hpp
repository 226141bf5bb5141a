#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace cst {

/// 32-byte content digest used to tie geometry, dataset, and model files
/// together. Plain FIPS 180-4 SHA-256.
class Sha256 {
 public:
  using Digest = std::array<std::uint8_t, 32>;

  Sha256() { reset(); }

  void reset();
  void update(const void* data, std::size_t len);
  Digest finish();

  static Digest of(const void* data, std::size_t len) {
    Sha256 h;
    h.update(data, len);
    return h.finish();
  }
  static Digest of(const std::string& s) { return of(s.data(), s.size()); }

  static std::string hex(const Digest& d);

 private:
  void process_block(const std::uint8_t* block);

  std::uint32_t h_[8];
  std::uint8_t buffer_[64];
  std::size_t buffered_ = 0;
  std::uint64_t total_bytes_ = 0;
};

/// Digest of a whole file. Throws IoError if the file cannot be read.
Sha256::Digest sha256_file(const std::string& path);

}  // namespace cst
