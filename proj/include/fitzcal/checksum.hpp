#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fitzcal {

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// Incremental form for hashing several buffers as one stream.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes);
  std::string hex_digest();

 private:
  void* ctx_;
};

}  // namespace fitzcal
