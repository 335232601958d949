#include "cameo/task.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <regex>
#include <thread>

#include "cameo/errors.hpp"
#include "cameo/semtype.hpp"

extern char** environ;

namespace cameo {

const char* to_string(TaskOutcome::Status s) {
  switch (s) {
    case TaskOutcome::Status::Succeeded:
      return "Succeeded";
    case TaskOutcome::Status::Failed:
      return "Failed";
    case TaskOutcome::Status::Cached:
      return "Cached";
  }
  return "?";
}

std::string contract_version(const TaskInstance& task, const Registry& registry) {
  if (!task.builtin.empty()) {
    const auto* c = registry.contract(task.builtin);
    if (!c) throw SchemaError("unknown operation '" + task.builtin + "'");
    return c->version;
  }
  return "exec-" + sha256(task.command).hex().substr(0, 16);
}

Digest256 cache_key(const TaskInstance& task, std::string_view version) {
  const json doc = {{"process", task.process}, {"version", version}, {"payload", task.payload}};
  return sha256(canonical_dump(doc));
}

RetryDecision apply_retry_policy(const TaskOutcome& outcome, const RetryPolicy& policy, int attempt,
                                 std::uint64_t jitter_seed) {
  if (outcome.status != TaskOutcome::Status::Failed || attempt > policy.max_retries) return {false, 0};
  Rng rng(jitter_seed);
  const double jitter = 0.9 + 0.2 * rng.uniform();
  const double delay = static_cast<double>(policy.base_delay_ms) * std::ldexp(1.0, attempt - 1) * jitter;
  return {true, static_cast<std::int64_t>(std::llround(delay))};
}

// ---- exec -----------------------------------------------------------------

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

}  // namespace

std::string render_command(const TaskInstance& task, const fs::path& dir) {
  static const std::regex re(R"(\$\{([^}]*)\})");
  const json& inputs = task.payload.contains("inputs") ? task.payload["inputs"] : json::object();
  const json& params = task.payload.contains("params") ? task.payload["params"] : json::object();
  std::string out;
  auto last = task.command.cbegin();
  for (auto it = std::sregex_iterator(task.command.begin(), task.command.end(), re); it != std::sregex_iterator();
       ++it) {
    out.append(last, task.command.cbegin() + it->position());
    last = task.command.cbegin() + it->position() + it->length();
    const std::string ref = (*it)[1].str();
    if (ref.rfind("inputs.", 0) == 0) {
      const std::string port = ref.substr(7);
      if (!inputs.contains(port)) throw TaskFailed("command references unknown input '" + port + "'");
      const json& v = inputs[port];
      if (is_file_ref(v)) {
        out += v["path"].get<std::string>();
      } else if (v.is_primitive()) {
        out += scalar_text(v);
      } else {
        const fs::path file = dir / "inputs" / (port + ".json");
        fs::create_directories(file.parent_path());
        write_file_atomic(file, v.dump());
        out += file.string();
      }
    } else if (ref.rfind("params.", 0) == 0) {
      const std::string name = ref.substr(7);
      if (!params.contains(name)) throw TaskFailed("command references unknown param '" + name + "'");
      out += is_file_ref(params[name]) ? params[name]["path"].get<std::string>() : scalar_text(params[name]);
    } else {
      throw TaskFailed("command has an unsupported placeholder ${" + ref + "}");
    }
  }
  out.append(last, task.command.cend());
  return out;
}

namespace {

struct ExecResult {
  int exit_code = 0;
  int signal = 0;
  bool timed_out = false;
  ResourceUsage usage;
};

ExecResult run_command(const std::string& command, const fs::path& dir, std::int64_t timeout_ms, bool measure) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addchdir_np(&actions, dir.c_str());
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, ".command.out", O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, 2, ".command.err", O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw TaskFailed(std::string("cannot start /bin/sh: ") + std::strerror(rc));

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  };
  ExecResult result;
  std::optional<std::uint64_t> peak;
  std::int64_t next_sample = 0;
  int status = 0;
  rusage ru{};
  for (;;) {
    const pid_t done = wait4(pid, &status, WNOHANG, &ru);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) throw TaskFailed(std::string("wait failed: ") + std::strerror(errno));
    const auto t = elapsed_ms();
    if (measure && t >= next_sample) {
      auto s = sample_process(pid, t);
      if (s.rss_bytes) peak = std::max(peak.value_or(0), *s.rss_bytes);
      next_sample = t + kSampleIntervalMs;
    }
    if (timeout_ms > 0 && t > timeout_ms && !result.timed_out) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) result.signal = WTERMSIG(status);
  if (measure) {
    const double cpu = static_cast<double>(ru.ru_utime.tv_sec + ru.ru_stime.tv_sec) +
                       static_cast<double>(ru.ru_utime.tv_usec + ru.ru_stime.tv_usec) * 1e-6;
    if (wall > 0) result.usage.cpu_fraction = cpu / wall;
    if (ru.ru_maxrss > 0) peak = std::max(peak.value_or(0), static_cast<std::uint64_t>(ru.ru_maxrss) * 1024);
    result.usage.peak_rss_bytes = peak;
  }
  return result;
}

json read_exec_outputs(const TaskInstance& task, const fs::path& dir) {
  json outputs = json::object();
  for (const auto& [port, type] : task.outputs) {
    const fs::path file = dir / (port + ".json");
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) throw TaskFailed("missing output file " + port + ".json");
    json v;
    try {
      v = json::parse(read_file(file));
    } catch (const json::exception& e) {
      throw TaskFailed("output file " + port + ".json is not valid: " + e.what());
    }
    // Exec commands may name produced files relative to their directory.
    const SemType t = parse_semtype(type);
    auto as_ref = [&](json& x) {
      if (x.is_string()) x = make_file_ref(dir / x.get<std::string>());
    };
    if (t == SemType::named("FileRef")) as_ref(v);
    if (t.is_list() && t.element() == SemType::named("FileRef") && v.is_array())
      for (auto& x : v) as_ref(x);
    outputs[port] = std::move(v);
  }
  return outputs;
}

void check_outputs(const TaskInstance& task, const json& outputs) {
  if (!outputs.is_object()) throw TaskFailed("operation returned a non-object output set");
  for (const auto& [port, type] : task.outputs) {
    if (!outputs.contains(port)) throw TaskFailed("output port '" + port + "' was not populated");
    const SemType t = parse_semtype(type);
    const json& v = outputs[port];
    if (t.is_list() && !v.is_array()) throw TaskFailed("output port '" + port + "' must be a list");
    if (t == SemType::named("FileRef") && !is_file_ref(v))
      throw TaskFailed("output port '" + port + "' must be a file reference");
    if (auto it = task.emits.find(port); it != task.emits.end() && v.size() != it->second)
      throw TaskFailed("output port '" + port + "' emitted " + std::to_string(v.size()) + " items, declared " +
                       std::to_string(it->second));
  }
  for (const auto& [port, v] : outputs.items())
    if (!task.outputs.count(port)) throw TaskFailed("undeclared output port '" + port + "'");
}

}  // namespace

TaskOutcome execute_task(const TaskInstance& task, const Registry& registry, CacheStore& store,
                         const ExecuteOptions& options) {
  TaskOutcome outcome;
  const std::string version = contract_version(task, registry);
  const Digest256 key = cache_key(task, version);
  const fs::path dir = store.dir(key);
  outcome.workdir = dir;
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);

  outcome.start_ms = now_ms();
  const auto start = std::chrono::steady_clock::now();
  try {
    json outputs;
    if (!task.builtin.empty()) {
      const auto* fn = registry.function(task.builtin);
      if (!fn) throw TaskFailed("unknown operation '" + task.builtin + "'");
      const auto deadline = start + std::chrono::milliseconds(task.timeout_ms);
      BuiltinContext ctx{task.payload.at("inputs"), task.payload.at("params"), dir, [&] {
                           return task.timeout_ms > 0 && std::chrono::steady_clock::now() > deadline;
                         }};
      ThreadCpuTimer cpu;
      try {
        outputs = (*fn)(ctx);
      } catch (const Timeout&) {
        outcome.timed_out = true;
        throw;
      }
      if (options.measure_resources) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (auto c = cpu.elapsed(); c && wall > 0) outcome.usage.cpu_fraction = *c / wall;
      }
    } else {
      const std::string command = render_command(task, dir);
      write_file_atomic(dir / ".command.sh", command + "\n");
      auto r = run_command(command, dir, task.timeout_ms, options.measure_resources);
      outcome.usage = r.usage;
      if (r.timed_out) {
        outcome.timed_out = true;
        throw Timeout("exceeded the " + std::to_string(task.timeout_ms) + " ms time limit");
      }
      if (r.signal) throw TaskFailed("killed by signal " + std::to_string(r.signal));
      if (r.exit_code != 0) throw TaskFailed("exit code " + std::to_string(r.exit_code));
      outputs = read_exec_outputs(task, dir);
    }
    check_outputs(task, outputs);
    outcome.outputs = std::move(outputs);
    outcome.status = TaskOutcome::Status::Succeeded;
  } catch (const Timeout& e) {
    outcome.status = TaskOutcome::Status::Failed;
    outcome.timed_out = true;
    outcome.error = std::string("timeout: ") + e.what();
  } catch (const std::exception& e) {
    outcome.status = TaskOutcome::Status::Failed;
    outcome.error = e.what();
  }
  outcome.complete_ms = std::max(now_ms(), outcome.start_ms);

  OutcomeManifest m;
  m.status = outcome.status == TaskOutcome::Status::Succeeded ? "Succeeded" : "Failed";
  m.key = key.hex();
  m.task_id = task.id;
  m.process = task.process;
  m.version = version;
  m.attempt = task.attempt;
  m.start_ms = outcome.start_ms;
  m.complete_ms = outcome.complete_ms;
  m.error = outcome.error;
  try {
    if (outcome.status == TaskOutcome::Status::Succeeded)
      for (const auto& [port, v] : outcome.outputs.items()) m.output_digests[port] = payload_digest(v);
  } catch (const SerializationError& e) {
    outcome.status = TaskOutcome::Status::Failed;
    outcome.error = e.what();
    outcome.outputs = json::object();
    m.status = "Failed";
    m.error = outcome.error;
    m.output_digests.clear();
  }
  store.write(key, m, outcome.status == TaskOutcome::Status::Succeeded ? &outcome.outputs : nullptr);
  return outcome;
}

}  // namespace cameo
