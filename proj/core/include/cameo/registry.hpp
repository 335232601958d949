#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cameo/digest.hpp"
#include "cameo/util.hpp"

namespace cameo {

struct ParamSpec {
  std::string name;
  bool file = false;      // a path resolved against the data directory; its content is hashed
  bool required = true;
};

/// Typed port signature of a builtin operation. `op_id` is `<name>@<version>`.
struct ComponentContract {
  std::string op_id;
  std::string version;
  std::map<std::string, std::string> inputs;   // port -> semantic type
  std::map<std::string, std::string> outputs;  // port -> semantic type
  std::vector<ParamSpec> params;
  std::string summary;

  const ParamSpec* param(std::string_view name) const;
};

struct BuiltinContext {
  const json& inputs;   // port -> payload
  const json& params;   // declared params only, file params as {path, digest}
  fs::path task_dir;
  /// Cooperative cancellation (per-task time limit); long operations poll it.
  std::function<bool()> should_stop;
};

/// Returns an object with one entry per declared output port.
using BuiltinFn = std::function<json(const BuiltinContext&)>;

class Registry {
 public:
  /// SchemaError when the op-id is malformed, duplicated or a port type does not parse.
  void add(ComponentContract contract, BuiltinFn fn);

  const ComponentContract* contract(std::string_view op_id) const;
  const BuiltinFn* function(std::string_view op_id) const;
  std::vector<std::string> op_ids() const;

 private:
  struct Entry {
    ComponentContract contract;
    BuiltinFn fn;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

/// Operations of the battery-sizing use case: wind, battery, scen_set, scen_tree,
/// design_ss, design_st and summarize.
const Registry& builtin_registry();

}  // namespace cameo
