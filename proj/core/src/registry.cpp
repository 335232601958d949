#include "cameo/registry.hpp"

#include "cameo/errors.hpp"
#include "cameo/semtype.hpp"

namespace cameo {

const ParamSpec* ComponentContract::param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

void Registry::add(ComponentContract contract, BuiltinFn fn) {
  const auto at = contract.op_id.find('@');
  if (at == std::string::npos || at == 0 || contract.op_id.substr(at + 1) != contract.version ||
      contract.version.empty())
    throw SchemaError("contract '" + contract.op_id + "': op-id must be <name>@<version>");
  if (entries_.count(contract.op_id)) throw SchemaError("contract '" + contract.op_id + "' registered twice");
  for (const auto* ports : {&contract.inputs, &contract.outputs})
    for (const auto& [port, type] : *ports) parse_semtype(type);
  std::string id = contract.op_id;
  entries_.emplace(std::move(id), Entry{std::move(contract), std::move(fn)});
}

const ComponentContract* Registry::contract(std::string_view op_id) const {
  auto it = entries_.find(op_id);
  return it == entries_.end() ? nullptr : &it->second.contract;
}

const BuiltinFn* Registry::function(std::string_view op_id) const {
  auto it = entries_.find(op_id);
  return it == entries_.end() ? nullptr : &it->second.fn;
}

std::vector<std::string> Registry::op_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

}  // namespace cameo
