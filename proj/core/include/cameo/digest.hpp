#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

#include <json.hpp>

namespace cameo {

using json = nlohmann::json;

struct Digest256 {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static Digest256 from_hex(std::string_view hex);
  auto operator<=>(const Digest256&) const = default;
};

Digest256 sha256(std::string_view data);
Digest256 sha256_file(const std::filesystem::path& path);

/// Canonical text for a payload: sorted object keys, no insignificant whitespace,
/// floating point as shortest round-trip decimal. Throws SerializationError on NaN/Inf
/// and on values that have no canonical form (binary blobs, discarded values).
std::string canonical_dump(const json& value);

/// FileRef payload `{"path": <absolute path>, "digest": <sha-256 hex of the content>}`.
json make_file_ref(const std::filesystem::path& path);
bool is_file_ref(const json& value);
/// True when the referenced file exists and still has the recorded digest.
bool file_ref_intact(const json& ref);

/// derive(seed, i): SHA-256 of the little-endian bytes of seed then i, truncated to 64 bits.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// mt19937_64 with hand-written distributions; the std:: distributions are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n), rejection-sampled; n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace cameo
