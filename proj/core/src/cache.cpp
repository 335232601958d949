#include "cameo/cache.hpp"

#include "cameo/errors.hpp"

namespace cameo {

namespace {

constexpr const char* kManifest = ".outcome";
constexpr const char* kOutputs = "outputs.json";

bool file_refs_intact(const json& v) {
  if (is_file_ref(v)) return file_ref_intact(v);
  if (v.is_array() || v.is_object())
    for (const auto& x : v)
      if (!file_refs_intact(x)) return false;
  return true;
}

}  // namespace

void to_json(json& j, const OutcomeManifest& m) {
  j = json{{"status", m.status},     {"key", m.key},           {"task_id", m.task_id},
           {"process", m.process},   {"version", m.version},   {"attempt", m.attempt},
           {"start_ms", m.start_ms}, {"complete_ms", m.complete_ms}, {"outputs", m.output_digests},
           {"error", m.error}};
}

void from_json(const json& j, OutcomeManifest& m) {
  j.at("status").get_to(m.status);
  j.at("key").get_to(m.key);
  m.task_id = j.value("task_id", "");
  m.process = j.value("process", "");
  m.version = j.value("version", "");
  m.attempt = j.value("attempt", 1);
  m.start_ms = j.value("start_ms", std::int64_t{0});
  m.complete_ms = j.value("complete_ms", std::int64_t{0});
  m.output_digests = j.value("outputs", std::map<std::string, std::string>{});
  m.error = j.value("error", "");
}

std::string payload_digest(const json& value) { return sha256(canonical_dump(value)).hex(); }

CacheStore::CacheStore(fs::path root) : root_(std::move(root)) {}

fs::path CacheStore::dir(const Digest256& key) const {
  const std::string hex = key.hex();
  return root_ / hex.substr(0, 2) / hex.substr(2);
}

std::optional<OutcomeManifest> CacheStore::read_manifest(const fs::path& d) {
  std::error_code ec;
  if (!fs::is_regular_file(d / kManifest, ec)) return std::nullopt;
  try {
    return json::parse(read_file(d / kManifest)).get<OutcomeManifest>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<json> CacheStore::lookup(const Digest256& key) const {
  const fs::path d = dir(key);
  auto manifest = read_manifest(d);
  if (!manifest || manifest->status != "Succeeded" || manifest->key != key.hex()) return std::nullopt;
  json outputs;
  try {
    outputs = json::parse(read_file(d / kOutputs));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!outputs.is_object() || outputs.size() != manifest->output_digests.size()) return std::nullopt;
  for (const auto& [port, digest] : manifest->output_digests) {
    if (!outputs.contains(port) || payload_digest(outputs[port]) != digest) return std::nullopt;
  }
  if (!file_refs_intact(outputs)) return std::nullopt;
  return outputs;
}

void CacheStore::write(const Digest256& key, const OutcomeManifest& manifest, const json* outputs) {
  std::lock_guard lock(write_mutex_);
  const fs::path d = dir(key);
  fs::create_directories(d);
  if (outputs) write_file_atomic(d / kOutputs, outputs->dump());
  write_file_atomic(d / kManifest, json(manifest).dump(2) + "\n");
}

}  // namespace cameo
