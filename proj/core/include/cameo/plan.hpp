#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cameo/channel.hpp"
#include "cameo/workflow.hpp"

namespace cameo {

struct PlannedTask {
  std::size_t index = 0;    // position in the plan; dispatch order among ready tasks
  std::string process;
  std::size_t ordinal = 0;  // position among the process's tasks
  std::string id;           // <process>-<ordinal>-<8 hex of the bindings digest>
  std::map<std::string, ItemExpr> bindings;  // input port -> item
  std::vector<std::size_t> deps;             // upstream task indices, ascending
};

struct SweepPlan {
  std::vector<std::pair<std::string, std::size_t>> counts;  // topological order
  std::vector<PlannedTask> tasks;

  std::size_t count(std::string_view process) const;
  std::size_t total() const { return tasks.size(); }
  /// Indices of tasks that consume `task`'s outputs, ascending.
  std::vector<std::size_t> dependents(std::size_t task) const;
};

/// Contents of every non-output channel source, keyed by channel name.
using SourceContents = std::map<std::string, Channel>;

/// Reads file and glob sources relative to `data_dir` (literal sources need no files).
/// Sites tables become WindFarmSite items, battery catalogs BatteryConfig items, other
/// files FileRef items.
SourceContents resolve_sources(const WorkflowSpec& spec, const fs::path& data_dir);

/// Number of list items a task of `process` emits on `port`, when declared.
std::optional<std::size_t> declared_emits(const WorkflowSpec& spec, const ProcessDef& process,
                                          const std::string& port);

/// Dry-run expansion into tasks. A process with several input ports gets the cross
/// product of its port channels in port-name order; a process without inputs runs once.
SweepPlan plan_tasks(const WorkflowSpec& spec, const ProcessGraph& graph, const SourceContents& sources);

}  // namespace cameo
