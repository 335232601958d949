#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cameo/digest.hpp"
#include "cameo/registry.hpp"
#include "cameo/semtype.hpp"
#include "cameo/util.hpp"

namespace cameo {

inline constexpr int kSchemaVersion = 1;

struct ChannelSource {
  enum class Kind { Literal, File, Glob, Output };

  Kind kind = Kind::Literal;
  json values = json::array();  // Literal: the items
  std::string path;             // File: catalog or table; Glob: pattern relative to the data dir
  std::string item_type;        // optional; inferred from the file extension when empty
  std::string process;          // Output
  std::string port;             // Output

  bool operator==(const ChannelSource&) const = default;
};

struct ChannelOp {
  enum class Kind { Cross, Flatten, Collect };

  Kind kind = Kind::Flatten;
  std::string with;  // Cross: the other channel

  bool operator==(const ChannelOp&) const = default;
};

struct ChannelDef {
  std::string name;
  ChannelSource source;
  std::vector<ChannelOp> ops;

  bool operator==(const ChannelDef&) const = default;
};

struct ProcessDef {
  std::string name;
  std::string builtin;  // op-id, or empty for an exec process
  std::string command;  // exec: shell template with ${inputs.<port>} and ${params.<name>}
  std::map<std::string, std::string> inputs;   // port -> channel name or `<process>.<port>`
  std::map<std::string, std::string> outputs;  // port -> semantic type
  int retries = 0;
  std::int64_t retry_backoff_ms = 100;
  std::int64_t timeout_ms = 0;  // 0: unlimited
  std::string tag;
  std::map<std::string, json> emits;  // list-valued port -> item count or param name
  std::vector<std::string> publish;   // FileRef outputs copied to the results directory
  json params = json::object();       // overrides of workflow params for this process

  bool is_builtin() const { return !builtin.empty(); }
  bool operator==(const ProcessDef&) const = default;
};

struct WorkflowSpec {
  int schema_version = kSchemaVersion;
  std::string name;
  json params = json::object();
  std::vector<ChannelDef> channels;
  std::vector<ProcessDef> processes;

  const ChannelDef* channel(std::string_view name) const;
  const ProcessDef* process(std::string_view name) const;
  /// Workflow params overlaid with the process's own.
  json params_for(const ProcessDef& p) const;

  bool operator==(const WorkflowSpec&) const = default;
};

/// SyntaxError for malformed text (line/column), SchemaError for structural problems.
WorkflowSpec parse_workflow(std::string_view text);
WorkflowSpec load_workflow(const fs::path& file);
json workflow_to_json(const WorkflowSpec& spec);
std::string serialize_workflow(const WorkflowSpec& spec);

/// Channel feeding a process input: a declared channel, or a direct `<process>.<port>`
/// reference wrapped as an output-sourced channel. nullopt when neither resolves.
std::optional<ChannelDef> binding_channel(const WorkflowSpec& spec, std::string_view ref);

/// Item type of a file or literal source.
SemType source_item_type(const ChannelSource& source);

/// Item type of a channel after its operators; SchemaError on unresolved references,
/// cycles or ill-typed operators.
SemType channel_type(const WorkflowSpec& spec, const ChannelDef& channel);

ValidationReport validate_workflow(const WorkflowSpec& spec, const Registry& registry);

struct DataEdge {
  std::string from_process;  // empty when the origin is a source channel
  std::string from_port;
  std::string from_channel;  // set when the origin is a source channel
  std::string to_process;
  std::string to_port;

  bool operator==(const DataEdge&) const = default;
};

struct ProcessGraph {
  std::vector<std::string> nodes;  // declaration order
  std::vector<DataEdge> edges;
  std::vector<std::string> topo_order;

  /// Processes whose outputs `process` consumes, in declaration order.
  std::vector<std::string> upstream(std::string_view process) const;
};

/// Deterministic topological order (ties by declaration order). CycleError names the
/// processes that cannot be ordered.
ProcessGraph build_dag(const WorkflowSpec& spec);

}  // namespace cameo
