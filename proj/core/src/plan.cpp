#include "cameo/plan.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <set>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"

namespace cameo {

std::size_t SweepPlan::count(std::string_view process) const {
  for (const auto& [name, n] : counts)
    if (name == process) return n;
  return 0;
}

std::vector<std::size_t> SweepPlan::dependents(std::size_t task) const {
  std::vector<std::size_t> out;
  for (std::size_t i = task + 1; i < tasks.size(); ++i)
    if (std::binary_search(tasks[i].deps.begin(), tasks[i].deps.end(), task)) out.push_back(i);
  return out;
}

namespace {

fs::path resolve_path(const fs::path& data_dir, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() ? p : data_dir / p;
}

std::vector<json> glob_files(const fs::path& data_dir, const std::string& pattern) {
  const fs::path full = resolve_path(data_dir, pattern);
  const fs::path dir = full.parent_path();
  const std::string name_pattern = full.filename().string();
  std::vector<fs::path> matches;
  std::error_code ec;
  if (fs::is_directory(dir, ec))
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && fnmatch(name_pattern.c_str(), entry.path().filename().c_str(), 0) == 0)
        matches.push_back(entry.path());
  std::sort(matches.begin(), matches.end());
  std::vector<json> out;
  for (const auto& m : matches) out.push_back(make_file_ref(m));
  return out;
}

std::string pad(std::size_t n) {
  std::string s = std::to_string(n);
  return s.size() < 4 ? std::string(4 - s.size(), '0') + s : s;
}

}  // namespace

SourceContents resolve_sources(const WorkflowSpec& spec, const fs::path& data_dir) {
  SourceContents out;
  for (const auto& c : spec.channels) {
    const auto& src = c.source;
    if (src.kind == ChannelSource::Kind::Output) continue;
    const SemType type = source_item_type(src);
    std::vector<json> values;
    switch (src.kind) {
      case ChannelSource::Kind::Literal:
        values.assign(src.values.begin(), src.values.end());
        break;
      case ChannelSource::Kind::File: {
        const fs::path file = resolve_path(data_dir, src.path);
        if (type == SemType::named("WindFarmSite")) {
          for (const auto& site : domain::load_sites(file)) values.push_back(site);
        } else if (type == SemType::named("BatteryConfig")) {
          for (const auto& b : domain::load_battery_catalog(file)) values.push_back(b);
        } else if (type == SemType::named("FileRef")) {
          if (!fs::is_regular_file(file)) throw IoError("channel '" + c.name + "': no such file " + file.string());
          values.push_back(make_file_ref(file));
        } else {
          throw SchemaError("channel '" + c.name + "': no loader for item type " + to_string(type));
        }
        break;
      }
      case ChannelSource::Kind::Glob:
        values = glob_files(data_dir, src.path);
        break;
      case ChannelSource::Kind::Output:
        break;
    }
    out[c.name] = literal_channel(type, values);
  }
  return out;
}

std::optional<std::size_t> declared_emits(const WorkflowSpec& spec, const ProcessDef& process,
                                          const std::string& port) {
  auto it = process.emits.find(port);
  if (it == process.emits.end()) return std::nullopt;
  if (it->second.is_number_integer()) return it->second.get<std::size_t>();
  const json params = spec.params_for(process);
  const auto name = it->second.get<std::string>();
  if (!params.contains(name) || !params[name].is_number_integer() || params[name].get<std::int64_t>() < 0)
    throw UnresolvedCardinality("process '" + process.name + "': emits." + port + " names '" + name +
                                "', which is not a non-negative integer param");
  return params[name].get<std::size_t>();
}

namespace {

class Planner {
 public:
  Planner(const WorkflowSpec& spec, const SourceContents& sources) : spec_(spec), sources_(sources) {}

  SweepPlan run(const ProcessGraph& graph) {
    for (const auto& name : graph.topo_order) plan_process(*spec_.process(name));
    return std::move(plan_);
  }

 private:
  Channel evaluate(const ChannelDef& c) {
    if (auto it = memo_.find(c.name); it != memo_.end()) return it->second;
    Channel ch;
    if (c.source.kind == ChannelSource::Kind::Output) {
      const auto* p = spec_.process(c.source.process);
      auto produced = tasks_of_.find(c.source.process);
      if (!p || produced == tasks_of_.end())
        throw SchemaError("channel '" + c.name + "': process '" + c.source.process + "' is not planned yet");
      ch.type = parse_semtype(p->outputs.at(c.source.port));
      const auto length = declared_emits(spec_, *p, c.source.port);
      for (auto t : produced->second) ch.items.push_back(ItemExpr::ref(t, c.source.port, length));
    } else {
      auto it = sources_.find(c.name);
      if (it == sources_.end()) throw SchemaError("channel '" + c.name + "': source contents not resolved");
      ch = it->second;
    }
    for (const auto& op : c.ops) {
      if (op.kind == ChannelOp::Kind::Cross) {
        const auto* other = spec_.channel(op.with);
        if (!other) throw SchemaError("channel '" + c.name + "': unresolved reference to channel '" + op.with + "'");
        Channel rhs = evaluate(*other);
        ch = apply_channel_op(ch, op.kind, &rhs);
      } else {
        ch = apply_channel_op(ch, op.kind);
      }
    }
    memo_[c.name] = ch;
    return ch;
  }

  void plan_process(const ProcessDef& p) {
    std::vector<std::string> ports;
    std::vector<Channel> channels;
    for (const auto& [port, ref] : p.inputs) {
      auto c = binding_channel(spec_, ref);
      if (!c) throw SchemaError("process '" + p.name + "': unresolved reference '" + ref + "'");
      ports.push_back(port);
      channels.push_back(evaluate(*c));
    }
    std::size_t n = 1;
    for (const auto& c : channels) n *= c.items.size();

    const json params = spec_.params_for(p);
    auto& mine = tasks_of_[p.name];
    for (std::size_t ordinal = 0; ordinal < n; ++ordinal) {
      PlannedTask t;
      t.index = plan_.tasks.size();
      t.process = p.name;
      t.ordinal = ordinal;
      // Left-major: the last port varies fastest.
      std::size_t rest = ordinal;
      for (std::size_t k = ports.size(); k-- > 0;) {
        const auto size = channels[k].items.size();
        t.bindings[ports[k]] = channels[k].items[rest % size];
        rest /= size;
      }
      for (const auto& [port, item] : t.bindings) referenced_tasks(item, t.deps);
      std::sort(t.deps.begin(), t.deps.end());
      t.deps.erase(std::unique(t.deps.begin(), t.deps.end()), t.deps.end());

      json desc = {{"process", p.name}, {"ordinal", ordinal}, {"params", params}, {"inputs", json::object()}};
      const auto id_of = [&](std::size_t i) { return plan_.tasks[i].id; };
      for (const auto& [port, item] : t.bindings) desc["inputs"][port] = describe(item, id_of);
      t.id = p.name + "-" + pad(ordinal) + "-" + sha256(canonical_dump(desc)).hex().substr(0, 8);

      mine.push_back(t.index);
      plan_.tasks.push_back(std::move(t));
    }
    plan_.counts.emplace_back(p.name, n);
  }

  const WorkflowSpec& spec_;
  const SourceContents& sources_;
  std::map<std::string, Channel> memo_;
  std::map<std::string, std::vector<std::size_t>> tasks_of_;
  SweepPlan plan_;
};

}  // namespace

SweepPlan plan_tasks(const WorkflowSpec& spec, const ProcessGraph& graph, const SourceContents& sources) {
  return Planner(spec, sources).run(graph);
}

}  // namespace cameo
