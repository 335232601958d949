#include "cameo/workflow.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <regex>
#include <set>
#include <tuple>

#include "cameo/errors.hpp"

namespace cameo {

const ChannelDef* WorkflowSpec::channel(std::string_view n) const {
  for (const auto& c : channels)
    if (c.name == n) return &c;
  return nullptr;
}

const ProcessDef* WorkflowSpec::process(std::string_view n) const {
  for (const auto& p : processes)
    if (p.name == n) return &p;
  return nullptr;
}

json WorkflowSpec::params_for(const ProcessDef& p) const {
  json merged = params;
  for (const auto& [k, v] : p.params.items()) merged[k] = v;
  return merged;
}

// ---- parsing --------------------------------------------------------------

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SchemaError(where + ": unknown key '" + key + "'");
}

std::string get_string(const json& obj, const char* key, const std::string& where, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw SchemaError(where + ": missing '" + key + "'");
    return {};
  }
  if (!it->is_string()) throw SchemaError(where + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where, std::int64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
    throw SchemaError(where + ": '" + key + "' must be a non-negative integer");
  return it->get<std::int64_t>();
}

std::string get_identifier(const json& obj, const std::string& where) {
  std::string name = get_string(obj, "name", where);
  if (!is_identifier(name)) throw SchemaError(where + ": invalid name '" + name + "'");
  return name;
}

ChannelSource parse_source(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": source must be an object");
  ChannelSource s;
  const std::string type = get_string(j, "type", where + " source");
  if (type == "literal") {
    check_keys(j, {"type", "values", "item_type"}, where + " source");
    s.kind = ChannelSource::Kind::Literal;
    auto it = j.find("values");
    if (it == j.end() || !it->is_array()) throw SchemaError(where + ": literal source needs a 'values' array");
    s.values = *it;
    s.item_type = get_string(j, "item_type", where, false);
  } else if (type == "file") {
    check_keys(j, {"type", "path", "item_type"}, where + " source");
    s.kind = ChannelSource::Kind::File;
    s.path = get_string(j, "path", where + " source");
    s.item_type = get_string(j, "item_type", where, false);
  } else if (type == "glob") {
    check_keys(j, {"type", "pattern"}, where + " source");
    s.kind = ChannelSource::Kind::Glob;
    s.path = get_string(j, "pattern", where + " source");
  } else if (type == "output") {
    check_keys(j, {"type", "process", "port"}, where + " source");
    s.kind = ChannelSource::Kind::Output;
    s.process = get_string(j, "process", where + " source");
    s.port = get_string(j, "port", where + " source");
  } else {
    throw SchemaError(where + ": unknown source type '" + type + "'");
  }
  if (!s.item_type.empty()) parse_semtype(s.item_type);
  return s;
}

ChannelOp parse_op(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": operator must be an object");
  const std::string op = get_string(j, "op", where);
  ChannelOp out;
  if (op == "cross") {
    check_keys(j, {"op", "with"}, where);
    out.kind = ChannelOp::Kind::Cross;
    if (!j.contains("with")) throw OperatorArity(where + ": cross needs a 'with' channel");
    out.with = get_string(j, "with", where);
  } else if (op == "flatten" || op == "collect") {
    check_keys(j, {"op"}, where);
    out.kind = op == "flatten" ? ChannelOp::Kind::Flatten : ChannelOp::Kind::Collect;
  } else {
    throw SchemaError(where + ": unknown operator '" + op + "'");
  }
  return out;
}

std::map<std::string, std::string> string_map(const json& obj, const char* key, const std::string& where) {
  std::map<std::string, std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_object()) throw SchemaError(where + ": '" + key + "' must be an object");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_string()) throw SchemaError(where + ": '" + key + "." + k + "' must be a string");
    if (!is_identifier(k)) throw SchemaError(where + ": invalid port name '" + k + "'");
    out[k] = v.get<std::string>();
  }
  return out;
}

ProcessDef parse_process(const json& j, std::size_t index) {
  std::string where = "processes[" + std::to_string(index) + "]";
  check_keys(j, {"name", "kind", "inputs", "outputs", "retries", "retry_backoff_ms", "timeout_ms", "tag",
                 "emits", "publish", "params"},
             where);
  ProcessDef p;
  p.name = get_identifier(j, where);
  where = "process '" + p.name + "'";
  auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_object() || kind->size() != 1)
    throw SchemaError(where + ": 'kind' must be {\"builtin\": op-id} or {\"exec\": command}");
  if (kind->contains("builtin")) {
    p.builtin = get_string(*kind, "builtin", where);
    if (p.builtin.empty()) throw SchemaError(where + ": empty builtin op-id");
  } else if (kind->contains("exec")) {
    p.command = get_string(*kind, "exec", where);
    if (p.command.empty()) throw SchemaError(where + ": empty exec command");
  } else {
    throw SchemaError(where + ": unknown process kind '" + kind->begin().key() + "'");
  }
  p.inputs = string_map(j, "inputs", where);
  p.outputs = string_map(j, "outputs", where);
  for (const auto& [port, type] : p.outputs) parse_semtype(type);
  p.retries = static_cast<int>(get_int(j, "retries", where, 0));
  p.retry_backoff_ms = get_int(j, "retry_backoff_ms", where, 100);
  p.timeout_ms = get_int(j, "timeout_ms", where, 0);
  p.tag = get_string(j, "tag", where, false);
  if (auto it = j.find("emits"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(where + ": 'emits' must be an object");
    for (const auto& [port, v] : it->items()) {
      if (!(v.is_string() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)))
        throw SchemaError(where + ": emits." + port + " must be a count or a param name");
      p.emits[port] = v;
    }
  }
  if (auto it = j.find("publish"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(where + ": 'publish' must be an array");
    for (const auto& v : *it) {
      if (!v.is_string()) throw SchemaError(where + ": 'publish' entries must be strings");
      p.publish.push_back(v.get<std::string>());
    }
  }
  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(where + ": 'params' must be an object");
    p.params = *it;
  }
  return p;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

WorkflowSpec parse_workflow(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw SyntaxError(line, col, what);
  }
  check_keys(doc, {"schema_version", "name", "params", "channels", "processes"}, "workflow");
  WorkflowSpec spec;
  spec.schema_version = static_cast<int>(get_int(doc, "schema_version", "workflow", kSchemaVersion));
  if (spec.schema_version != kSchemaVersion)
    throw SchemaError("workflow: unsupported schema_version " + std::to_string(spec.schema_version));
  spec.name = get_string(doc, "name", "workflow");
  if (spec.name.empty()) throw SchemaError("workflow: empty name");
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("workflow: 'params' must be an object");
    spec.params = *it;
  }

  auto list = [&](const char* key) -> json {
    auto it = doc.find(key);
    if (it == doc.end()) return json::array();
    if (!it->is_array()) throw SchemaError(std::string("workflow: '") + key + "' must be an array");
    return *it;
  };
  std::set<std::string> seen;
  const json channels = list("channels");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const std::string where = "channels[" + std::to_string(i) + "]";
    check_keys(channels[i], {"name", "source", "ops"}, where);
    ChannelDef c;
    c.name = get_identifier(channels[i], where);
    if (!seen.insert(c.name).second) throw SchemaError("duplicate channel name '" + c.name + "'");
    if (!channels[i].contains("source")) throw SchemaError("channel '" + c.name + "': missing 'source'");
    c.source = parse_source(channels[i]["source"], "channel '" + c.name + "'");
    if (auto it = channels[i].find("ops"); it != channels[i].end()) {
      if (!it->is_array()) throw SchemaError("channel '" + c.name + "': 'ops' must be an array");
      for (const auto& op : *it) c.ops.push_back(parse_op(op, "channel '" + c.name + "'"));
    }
    spec.channels.push_back(std::move(c));
  }
  seen.clear();
  const json processes = list("processes");
  for (std::size_t i = 0; i < processes.size(); ++i) {
    ProcessDef p = parse_process(processes[i], i);
    if (!seen.insert(p.name).second) throw SchemaError("duplicate process name '" + p.name + "'");
    spec.processes.push_back(std::move(p));
  }
  return spec;
}

WorkflowSpec load_workflow(const fs::path& file) { return parse_workflow(read_file(file)); }

json workflow_to_json(const WorkflowSpec& spec) {
  json doc;
  doc["schema_version"] = spec.schema_version;
  doc["name"] = spec.name;
  doc["params"] = spec.params;
  doc["channels"] = json::array();
  for (const auto& c : spec.channels) {
    json src;
    switch (c.source.kind) {
      case ChannelSource::Kind::Literal:
        src = {{"type", "literal"}, {"values", c.source.values}};
        break;
      case ChannelSource::Kind::File:
        src = {{"type", "file"}, {"path", c.source.path}};
        break;
      case ChannelSource::Kind::Glob:
        src = {{"type", "glob"}, {"pattern", c.source.path}};
        break;
      case ChannelSource::Kind::Output:
        src = {{"type", "output"}, {"process", c.source.process}, {"port", c.source.port}};
        break;
    }
    if (!c.source.item_type.empty()) src["item_type"] = c.source.item_type;
    json ops = json::array();
    for (const auto& op : c.ops) {
      switch (op.kind) {
        case ChannelOp::Kind::Cross:
          ops.push_back({{"op", "cross"}, {"with", op.with}});
          break;
        case ChannelOp::Kind::Flatten:
          ops.push_back({{"op", "flatten"}});
          break;
        case ChannelOp::Kind::Collect:
          ops.push_back({{"op", "collect"}});
          break;
      }
    }
    doc["channels"].push_back({{"name", c.name}, {"source", src}, {"ops", ops}});
  }
  doc["processes"] = json::array();
  for (const auto& p : spec.processes) {
    json j;
    j["name"] = p.name;
    j["kind"] = p.is_builtin() ? json{{"builtin", p.builtin}} : json{{"exec", p.command}};
    j["inputs"] = p.inputs;
    j["outputs"] = p.outputs;
    j["retries"] = p.retries;
    j["retry_backoff_ms"] = p.retry_backoff_ms;
    j["timeout_ms"] = p.timeout_ms;
    j["tag"] = p.tag;
    j["emits"] = json::object();
    for (const auto& [port, v] : p.emits) j["emits"][port] = v;
    j["publish"] = p.publish;
    j["params"] = p.params;
    doc["processes"].push_back(std::move(j));
  }
  return doc;
}

std::string serialize_workflow(const WorkflowSpec& spec) { return workflow_to_json(spec).dump(2) + "\n"; }

// ---- typing ---------------------------------------------------------------

std::optional<ChannelDef> binding_channel(const WorkflowSpec& spec, std::string_view ref) {
  if (const auto* c = spec.channel(ref)) return *c;
  const auto dot = ref.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  const auto* p = spec.process(ref.substr(0, dot));
  const std::string port(ref.substr(dot + 1));
  if (!p || !p->outputs.count(port)) return std::nullopt;
  ChannelDef c;
  c.name = std::string(ref);
  c.source.kind = ChannelSource::Kind::Output;
  c.source.process = p->name;
  c.source.port = port;
  return c;
}

SemType source_item_type(const ChannelSource& source) {
  if (!source.item_type.empty()) return parse_semtype(source.item_type);
  switch (source.kind) {
    case ChannelSource::Kind::Literal:
      return SemType::named("Scalar");
    case ChannelSource::Kind::File: {
      const auto ext = fs::path(source.path).extension().string();
      if (ext == ".csv") return SemType::named("WindFarmSite");
      if (ext == ".json") return SemType::named("BatteryConfig");
      return SemType::named("FileRef");
    }
    case ChannelSource::Kind::Glob:
      return SemType::named("FileRef");
    case ChannelSource::Kind::Output:
      break;
  }
  throw SchemaError("output-sourced channel has no intrinsic item type");
}

namespace {

SemType channel_type_impl(const WorkflowSpec& spec, const ChannelDef& c, std::set<std::string>& visiting) {
  if (!visiting.insert(c.name).second) throw SchemaError("channel '" + c.name + "' is part of a cycle");
  SemType t;
  if (c.source.kind == ChannelSource::Kind::Output) {
    const auto* p = spec.process(c.source.process);
    if (!p) throw SchemaError("channel '" + c.name + "': unresolved reference to process '" + c.source.process + "'");
    auto it = p->outputs.find(c.source.port);
    if (it == p->outputs.end())
      throw SchemaError("channel '" + c.name + "': unresolved reference to port '" + c.source.process + "." +
                        c.source.port + "'");
    t = parse_semtype(it->second);
  } else {
    t = source_item_type(c.source);
  }
  for (const auto& op : c.ops) {
    switch (op.kind) {
      case ChannelOp::Kind::Cross: {
        const auto* other = spec.channel(op.with);
        if (!other) throw SchemaError("channel '" + c.name + "': unresolved reference to channel '" + op.with + "'");
        t = cross_type(t, channel_type_impl(spec, *other, visiting));
        break;
      }
      case ChannelOp::Kind::Flatten:
        try {
          t = flatten_type(t);
        } catch (const SchemaError& e) {
          throw SchemaError("channel '" + c.name + "': " + e.what());
        }
        break;
      case ChannelOp::Kind::Collect:
        t = collect_type(t);
        break;
    }
  }
  visiting.erase(c.name);
  return t;
}

std::vector<std::string> template_references(const std::string& text, const char* pattern) {
  std::vector<std::string> refs;
  const std::regex re(pattern);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
    refs.push_back((*it)[1].str());
  return refs;
}

}  // namespace

SemType channel_type(const WorkflowSpec& spec, const ChannelDef& channel) {
  std::set<std::string> visiting;
  return channel_type_impl(spec, channel, visiting);
}

// ---- validation -----------------------------------------------------------

ValidationReport validate_workflow(const WorkflowSpec& spec, const Registry& registry) {
  ValidationReport report;
  std::set<std::string> used_channels;

  for (const auto& c : spec.channels) {
    try {
      channel_type(spec, c);
    } catch (const SchemaError& e) {
      report.error("channel " + c.name, e.what());
    }
    for (const auto& op : c.ops)
      if (op.kind == ChannelOp::Kind::Cross) used_channels.insert(op.with);
  }

  for (const auto& p : spec.processes) {
    const std::string subject = "process " + p.name;
    const json params = spec.params_for(p);

    std::map<std::string, SemType> bound;
    for (const auto& [port, ref] : p.inputs) {
      used_channels.insert(ref);
      auto channel = binding_channel(spec, ref);
      if (!channel) {
        report.error(subject, "unresolved reference '" + ref + "' on port '" + port + "'");
        continue;
      }
      try {
        bound[port] = channel_type(spec, *channel);
      } catch (const SchemaError& e) {
        report.error(subject, std::string("port '") + port + "': " + e.what());
      }
    }

    if (p.is_builtin()) {
      const auto* contract = registry.contract(p.builtin);
      if (!contract) {
        report.error(subject, "unknown operation '" + p.builtin + "'");
      } else {
        for (const auto& [port, type] : contract->inputs) {
          if (!p.inputs.count(port)) {
            report.error(subject, "unbound port '" + port + "' (expects " + type + ")");
            continue;
          }
          auto it = bound.find(port);
          if (it != bound.end() && !(it->second == parse_semtype(type)))
            report.error(subject, "port type mismatch on '" + port + "': expects " + type + ", channel '" +
                                      p.inputs.at(port) + "' carries " + to_string(it->second));
        }
        for (const auto& [port, ref] : p.inputs)
          if (!contract->inputs.count(port))
            report.error(subject, "unknown input port '" + port + "' for " + p.builtin);
        for (const auto& [port, type] : contract->outputs) {
          auto it = p.outputs.find(port);
          if (it == p.outputs.end())
            report.error(subject, "missing output port '" + port + "' (" + type + ")");
          else if (!(parse_semtype(it->second) == parse_semtype(type)))
            report.error(subject, "output type mismatch on '" + port + "': contract declares " + type +
                                      ", process declares " + it->second);
        }
        for (const auto& [port, type] : p.outputs)
          if (!contract->outputs.count(port))
            report.error(subject, "unknown output port '" + port + "' for " + p.builtin);
        for (const auto& param : contract->params) {
          if (!params.contains(param.name)) {
            if (param.required) report.error(subject, "missing parameter '" + param.name + "'");
          } else if (param.file && !params[param.name].is_string()) {
            report.error(subject, "parameter '" + param.name + "' must be a file path");
          }
        }
      }
    } else {
      for (const auto& ref : template_references(p.command, R"(\$\{([^}]*)\})")) {
        bool ok = false;
        if (ref.rfind("inputs.", 0) == 0) ok = p.inputs.count(ref.substr(7)) > 0;
        else if (ref.rfind("params.", 0) == 0) ok = params.contains(ref.substr(7));
        if (!ok) report.error(subject, "undeclared reference ${" + ref + "} in command");
      }
      if (p.outputs.empty()) report.warning(subject, "exec process declares no outputs");
    }

    for (const auto& [port, count] : p.emits) {
      auto it = p.outputs.find(port);
      if (it == p.outputs.end() || !parse_semtype(it->second).is_list()) {
        report.error(subject, "emits names '" + port + "', which is not a list-valued output");
        continue;
      }
      if (count.is_string()) {
        const auto name = count.get<std::string>();
        if (!params.contains(name) || !params[name].is_number_integer() || params[name].get<std::int64_t>() < 0)
          report.error(subject, "emits." + port + " refers to '" + name + "', which is not a non-negative integer param");
      }
    }
    for (const auto& port : p.publish) {
      auto it = p.outputs.find(port);
      const bool file_ref = it != p.outputs.end() &&
                            (it->second == "FileRef" || parse_semtype(it->second) == parse_semtype("[FileRef]"));
      if (!file_ref) report.error(subject, "publish names '" + port + "', which is not a FileRef output");
    }
    static const std::set<std::string> kTagKeys = {"site", "battery", "set", "tree", "record", "process", "ordinal"};
    for (const auto& key : template_references(p.tag, R"(\{([^}]*)\})")) {
      if (kTagKeys.count(key) || p.inputs.count(key) || params.contains(key)) continue;
      report.warning(subject, "tag placeholder {" + key + "} never resolves");
    }
  }

  for (const auto& c : spec.channels)
    if (!used_channels.count(c.name)) report.warning("channel " + c.name, "channel is never consumed");

  if (report.ok()) {
    try {
      build_dag(spec);
    } catch (const CycleError& e) {
      report.error("workflow", e.what());
    }
  }
  return report;
}

// ---- graph ----------------------------------------------------------------

std::vector<std::string> ProcessGraph::upstream(std::string_view process) const {
  std::set<std::string> from;
  for (const auto& e : edges)
    if (e.to_process == process && !e.from_process.empty()) from.insert(e.from_process);
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (from.count(n)) out.push_back(n);
  return out;
}

namespace {

struct Origin {
  std::string process, port, channel;
  bool operator<(const Origin& o) const {
    return std::tie(process, port, channel) < std::tie(o.process, o.port, o.channel);
  }
};

void collect_origins(const WorkflowSpec& spec, const ChannelDef& c, std::vector<Origin>& out,
                     std::set<std::string>& visiting) {
  if (!visiting.insert(c.name).second) throw SchemaError("channel '" + c.name + "' is part of a cycle");
  Origin o = c.source.kind == ChannelSource::Kind::Output ? Origin{c.source.process, c.source.port, {}}
                                                          : Origin{{}, {}, c.name};
  if (std::find_if(out.begin(), out.end(), [&](const Origin& x) { return !(x < o) && !(o < x); }) == out.end())
    out.push_back(o);
  for (const auto& op : c.ops) {
    if (op.kind != ChannelOp::Kind::Cross) continue;
    const auto* other = spec.channel(op.with);
    if (!other) throw SchemaError("channel '" + c.name + "': unresolved reference to channel '" + op.with + "'");
    collect_origins(spec, *other, out, visiting);
  }
  visiting.erase(c.name);
}

}  // namespace

ProcessGraph build_dag(const WorkflowSpec& spec) {
  ProcessGraph g;
  std::map<std::string, std::size_t> index;
  for (const auto& p : spec.processes) {
    index[p.name] = g.nodes.size();
    g.nodes.push_back(p.name);
  }
  const std::size_t n = g.nodes.size();
  std::vector<std::set<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);

  for (const auto& p : spec.processes) {
    for (const auto& [port, ref] : p.inputs) {
      auto channel = binding_channel(spec, ref);
      if (!channel) throw SchemaError("process '" + p.name + "': unresolved reference '" + ref + "'");
      std::vector<Origin> origins;
      std::set<std::string> visiting;
      collect_origins(spec, *channel, origins, visiting);
      for (const auto& o : origins) {
        if (!o.process.empty() && !index.count(o.process))
          throw SchemaError("process '" + p.name + "': unresolved reference to process '" + o.process + "'");
        g.edges.push_back({o.process, o.port, o.channel, p.name, port});
        if (!o.process.empty() && succ[index[o.process]].insert(index[p.name]).second) ++indegree[index[p.name]];
      }
    }
  }

  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    if (pick == n) break;
    done[pick] = true;
    g.topo_order.push_back(g.nodes[pick]);
    for (auto s : succ[pick]) --indegree[s];
  }
  if (g.topo_order.size() != n) {
    // Trim nodes that merely hang off a cycle so the error names the cycle itself.
    std::vector<bool> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = !done[i];
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        bool has_kept_succ = std::any_of(succ[i].begin(), succ[i].end(), [&](std::size_t s) { return keep[s]; });
        if (!has_kept_succ) {
          keep[i] = false;
          changed = true;
        }
      }
    }
    std::vector<std::string> cyclic;
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) cyclic.push_back(g.nodes[i]);
    throw CycleError(cyclic);
  }
  return g;
}

}  // namespace cameo
