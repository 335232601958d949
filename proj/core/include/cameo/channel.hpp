#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cameo/digest.hpp"
#include "cameo/semtype.hpp"
#include "cameo/workflow.hpp"

namespace cameo {

/// A channel item whose value may not exist yet: a literal, a reference to a task
/// output (optionally an element of it), a tuple built by `cross`, or a list built by
/// `collect`.
struct ItemExpr {
  enum class Kind { Literal, Ref, Tuple, List };

  Kind kind = Kind::Literal;
  json value;                        // Literal
  std::size_t task = 0;              // Ref: plan index of the producing task
  std::string port;                  // Ref
  std::vector<std::size_t> path;     // Ref: element indices into the output
  std::optional<std::size_t> length; // Ref: declared list length (from `emits`)
  std::vector<ItemExpr> parts;       // Tuple parts or List elements
  std::vector<bool> splice;          // Tuple: part is itself a tuple to inline

  static ItemExpr literal(json v);
  static ItemExpr ref(std::size_t task, std::string port, std::optional<std::size_t> length = {});

  bool operator==(const ItemExpr&) const = default;
};

struct Channel {
  SemType type;
  std::vector<ItemExpr> items;
};

Channel literal_channel(SemType type, const std::vector<json>& values);

/// cross: |a|*|b| tuples in left-major order (OperatorArity without `other`);
/// flatten: splices list items (UnresolvedCardinality when a referenced list has no
/// declared length); collect: one list holding every item.
Channel apply_channel_op(const Channel& items, ChannelOp::Kind op, const Channel* other = nullptr);

/// Task indices referenced anywhere in the item.
void referenced_tasks(const ItemExpr& item, std::vector<std::size_t>& out);

using OutputLookup = std::function<const json&(std::size_t task, const std::string& port)>;

/// Concrete payload of an item. InvariantError when a referenced element is missing.
json materialize(const ItemExpr& item, const OutputLookup& lookup);
/// Items of a channel without references.
std::vector<json> materialize(const Channel& channel);

/// Stable description used for task ids: references name the producing task id.
json describe(const ItemExpr& item, const std::function<std::string(std::size_t)>& task_id);

}  // namespace cameo
