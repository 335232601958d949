#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "cameo/digest.hpp"
#include "cameo/util.hpp"

namespace cameo {

/// `.outcome` manifest, written last in a task directory.
struct OutcomeManifest {
  std::string status;  // Succeeded | Failed
  std::string key;     // hex cache key
  std::string task_id;
  std::string process;
  std::string version;
  int attempt = 1;
  std::int64_t start_ms = 0;
  std::int64_t complete_ms = 0;
  std::map<std::string, std::string> output_digests;  // port -> sha-256 of its canonical payload
  std::string error;
};

void to_json(json& j, const OutcomeManifest& m);
void from_json(const json& j, OutcomeManifest& m);

/// Content-addressed store under `<root>/<2 hex>/<62 hex>/`. A directory is a cache
/// entry only when its `.outcome` says Succeeded and every recorded digest still
/// matches, including the content of FileRef outputs.
class CacheStore {
 public:
  explicit CacheStore(fs::path root);

  const fs::path& root() const { return root_; }
  fs::path dir(const Digest256& key) const;

  /// Outputs of a Succeeded entry; nullopt when absent, failed, torn or tampered.
  std::optional<json> lookup(const Digest256& key) const;

  /// Writes outputs.json then `.outcome`, each atomically. Writes are serialized.
  void write(const Digest256& key, const OutcomeManifest& manifest, const json* outputs);

  static std::optional<OutcomeManifest> read_manifest(const fs::path& dir);

 private:
  fs::path root_;
  mutable std::mutex write_mutex_;
};

/// sha-256 of the canonical form of one output payload.
std::string payload_digest(const json& value);

}  // namespace cameo
