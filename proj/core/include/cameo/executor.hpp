#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "cameo/plan.hpp"
#include "cameo/registry.hpp"
#include "cameo/task.hpp"
#include "cameo/workflow.hpp"

namespace cameo {

enum class TaskState { Pending, Ready, Running, Succeeded, Failed, Retrying, FailedPermanent, Skipped, Cached };

const char* to_string(TaskState s);
bool is_terminal(TaskState s);

/// `CAMEO_WORKDIR` when set, otherwise `cameo-work` under the current directory.
fs::path default_workdir();

struct RunOptions {
  std::size_t max_parallel = 1;
  bool resume = false;
  fs::path workdir;   // empty: default_workdir()
  fs::path data_dir;  // base for file-valued params; empty: current directory
  std::uint64_t seed = 42;  // retry jitter
  /// Stop dispatching once this many tasks have succeeded (0: never), then drain.
  std::size_t abort_after_successes = 0;
  /// Polled by the coordinator; when set the run drains and aborts.
  const std::atomic<bool>* interrupt = nullptr;
  bool measure_resources = true;
};

struct RunResult {
  fs::path run_dir;
  fs::path trace_file;
  fs::path scheduler_log;
  std::vector<TaskState> states;  // indexed like the plan
  std::vector<std::string> errors;  // "<task id>: <error>" for permanent failures
  std::size_t executed = 0;  // tasks run at least once in this run
  std::size_t succeeded = 0;
  std::size_t cached = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::size_t peak_running = 0;
  std::vector<fs::path> published;

  bool ok() const { return failed == 0 && skipped == 0; }
};

/// Resolved payload of one task: materialized inputs plus its params. Builtins receive
/// the params their contract declares, with file params as FileRefs under `data_dir`;
/// exec processes receive every workflow param.
json task_payload(const WorkflowSpec& spec, const ProcessDef& process, const Registry& registry,
                  const json& inputs, const fs::path& data_dir);

/// Replaces `{site}`, `{battery}`, `{set}`, `{tree}`, `{record}`, `{process}`,
/// `{ordinal}` and `{<port>}` / `{<param>}` placeholders; unknown ones are left as is.
std::string render_tag(const std::string& tmpl, const PlannedTask& task, const json& payload);

/// Executes the plan in `<workdir>/runs/run-NNN/` with at most `max_parallel` tasks
/// running. Writes trace.tsv, scheduler.log and the provenance report there; published
/// outputs are copied to `<workdir>/results/`. RunAborted after draining on interrupt.
RunResult run_workflow(const WorkflowSpec& spec, const SweepPlan& plan, const Registry& registry,
                       const RunOptions& options);

}  // namespace cameo
