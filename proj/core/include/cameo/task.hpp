#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "cameo/cache.hpp"
#include "cameo/digest.hpp"
#include "cameo/registry.hpp"
#include "cameo/resources.hpp"

namespace cameo {

struct RetryPolicy {
  int max_retries = 0;
  std::int64_t base_delay_ms = 100;
};

/// One unit of work with its inputs resolved.
struct TaskInstance {
  std::string id;
  std::string process;
  json payload = json::object();  // {"inputs": {port: item}, "params": {...}}
  int attempt = 1;
  std::string tag;

  std::string builtin;  // op-id, or empty for exec
  std::string command;  // exec template
  std::map<std::string, std::string> outputs;  // port -> semantic type
  std::map<std::string, std::size_t> emits;    // port -> exact list length
  std::int64_t timeout_ms = 0;
  RetryPolicy retry;
};

struct TaskOutcome {
  enum class Status { Succeeded, Failed, Cached };

  Status status = Status::Failed;
  json outputs = json::object();
  std::string error;
  fs::path workdir;
  std::int64_t start_ms = 0;
  std::int64_t complete_ms = 0;
  ResourceUsage usage;
  bool timed_out = false;
};

const char* to_string(TaskOutcome::Status s);

/// Builtins use their contract version; exec processes a digest of the command template,
/// so editing the command invalidates cached results.
std::string contract_version(const TaskInstance& task, const Registry& registry);

/// SHA-256 of the canonical {process, version, payload}. Attempt, tag, timing and retry
/// policy are not part of it. SerializationError for payloads without canonical form.
Digest256 cache_key(const TaskInstance& task, std::string_view version);

struct ExecuteOptions {
  bool measure_resources = true;
};

/// Runs one attempt in the task's cache directory (cleared first) and writes its
/// `.outcome` manifest. Failures of the operation are reported in the outcome, not thrown.
TaskOutcome execute_task(const TaskInstance& task, const Registry& registry, CacheStore& store,
                         const ExecuteOptions& options = {});

struct RetryDecision {
  bool retry = false;
  std::int64_t delay_ms = 0;
};

/// Retry while attempt <= max_retries, after base * 2^(attempt-1) ms scaled by a jitter
/// factor in [0.9, 1.1] drawn from `jitter_seed`.
RetryDecision apply_retry_policy(const TaskOutcome& outcome, const RetryPolicy& policy, int attempt,
                                 std::uint64_t jitter_seed);

/// Renders `${inputs.<port>}` and `${params.<name>}`. Strings and numbers substitute
/// their value, FileRefs their path; other inputs are written to `inputs/<port>.json`
/// under `dir` and substitute that path.
std::string render_command(const TaskInstance& task, const fs::path& dir);

}  // namespace cameo
