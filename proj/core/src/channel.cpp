#include "cameo/channel.hpp"

#include "cameo/errors.hpp"

namespace cameo {

ItemExpr ItemExpr::literal(json v) {
  ItemExpr e;
  e.kind = Kind::Literal;
  e.value = std::move(v);
  return e;
}

ItemExpr ItemExpr::ref(std::size_t task, std::string port, std::optional<std::size_t> length) {
  ItemExpr e;
  e.kind = Kind::Ref;
  e.task = task;
  e.port = std::move(port);
  e.length = length;
  return e;
}

Channel literal_channel(SemType type, const std::vector<json>& values) {
  Channel c{std::move(type), {}};
  c.items.reserve(values.size());
  for (const auto& v : values) c.items.push_back(ItemExpr::literal(v));
  return c;
}

namespace {

void append_part(ItemExpr& tuple, const ItemExpr& part, bool part_is_tuple) {
  if (part_is_tuple && part.kind == ItemExpr::Kind::Tuple) {
    tuple.parts.insert(tuple.parts.end(), part.parts.begin(), part.parts.end());
    tuple.splice.insert(tuple.splice.end(), part.splice.begin(), part.splice.end());
  } else {
    tuple.parts.push_back(part);
    tuple.splice.push_back(part_is_tuple);
  }
}

std::vector<ItemExpr> elements(const ItemExpr& item) {
  switch (item.kind) {
    case ItemExpr::Kind::Literal: {
      if (!item.value.is_array()) throw SchemaError("flatten of a non-list literal " + item.value.dump());
      std::vector<ItemExpr> out;
      for (const auto& v : item.value) out.push_back(ItemExpr::literal(v));
      return out;
    }
    case ItemExpr::Kind::List:
      return item.parts;
    case ItemExpr::Kind::Ref: {
      if (!item.length)
        throw UnresolvedCardinality("flatten of output '" + item.port + "' of task #" + std::to_string(item.task) +
                                    " needs a declared 'emits' count");
      std::vector<ItemExpr> out;
      for (std::size_t i = 0; i < *item.length; ++i) {
        ItemExpr e = ItemExpr::ref(item.task, item.port);
        e.path = item.path;
        e.path.push_back(i);
        out.push_back(std::move(e));
      }
      return out;
    }
    case ItemExpr::Kind::Tuple:
      break;
  }
  throw SchemaError("flatten of a tuple item");
}

}  // namespace

Channel apply_channel_op(const Channel& items, ChannelOp::Kind op, const Channel* other) {
  Channel out;
  switch (op) {
    case ChannelOp::Kind::Cross: {
      if (!other) throw OperatorArity("cross needs a second channel");
      out.type = cross_type(items.type, other->type);
      out.items.reserve(items.items.size() * other->items.size());
      for (const auto& a : items.items)
        for (const auto& b : other->items) {
          ItemExpr t;
          t.kind = ItemExpr::Kind::Tuple;
          append_part(t, a, items.type.is_tuple());
          append_part(t, b, other->type.is_tuple());
          out.items.push_back(std::move(t));
        }
      break;
    }
    case ChannelOp::Kind::Flatten:
      out.type = flatten_type(items.type);
      for (const auto& item : items.items)
        for (auto& e : elements(item)) out.items.push_back(std::move(e));
      break;
    case ChannelOp::Kind::Collect: {
      out.type = collect_type(items.type);
      ItemExpr list;
      list.kind = ItemExpr::Kind::List;
      list.parts = items.items;
      out.items.push_back(std::move(list));
      break;
    }
  }
  return out;
}

void referenced_tasks(const ItemExpr& item, std::vector<std::size_t>& out) {
  if (item.kind == ItemExpr::Kind::Ref) out.push_back(item.task);
  for (const auto& p : item.parts) referenced_tasks(p, out);
}

json materialize(const ItemExpr& item, const OutputLookup& lookup) {
  switch (item.kind) {
    case ItemExpr::Kind::Literal:
      return item.value;
    case ItemExpr::Kind::Ref: {
      const json* v = &lookup(item.task, item.port);
      for (auto i : item.path) {
        if (!v->is_array() || i >= v->size())
          throw InvariantError("output '" + item.port + "' of task #" + std::to_string(item.task) +
                               " has no element " + std::to_string(i));
        v = &(*v)[i];
      }
      return *v;
    }
    case ItemExpr::Kind::Tuple: {
      json out = json::array();
      for (std::size_t i = 0; i < item.parts.size(); ++i) {
        json v = materialize(item.parts[i], lookup);
        if (item.splice[i]) {
          if (!v.is_array()) throw InvariantError("tuple part is not a tuple: " + v.dump().substr(0, 80));
          for (auto& x : v) out.push_back(std::move(x));
        } else {
          out.push_back(std::move(v));
        }
      }
      return out;
    }
    case ItemExpr::Kind::List: {
      json out = json::array();
      for (const auto& p : item.parts) out.push_back(materialize(p, lookup));
      return out;
    }
  }
  return {};
}

std::vector<json> materialize(const Channel& channel) {
  const OutputLookup none = [](std::size_t task, const std::string& port) -> const json& {
    throw InvariantError("channel item refers to output '" + port + "' of task #" + std::to_string(task));
  };
  std::vector<json> out;
  out.reserve(channel.items.size());
  for (const auto& item : channel.items) out.push_back(materialize(item, none));
  return out;
}

json describe(const ItemExpr& item, const std::function<std::string(std::size_t)>& task_id) {
  switch (item.kind) {
    case ItemExpr::Kind::Literal:
      return json{{"lit", item.value}};
    case ItemExpr::Kind::Ref:
      return json{{"ref", task_id(item.task)}, {"port", item.port}, {"path", item.path}};
    case ItemExpr::Kind::Tuple: {
      json parts = json::array();
      for (std::size_t i = 0; i < item.parts.size(); ++i)
        parts.push_back({{"splice", static_cast<bool>(item.splice[i])}, {"item", describe(item.parts[i], task_id)}});
      return json{{"tuple", parts}};
    }
    case ItemExpr::Kind::List: {
      json parts = json::array();
      for (const auto& p : item.parts) parts.push_back(describe(p, task_id));
      return json{{"list", parts}};
    }
  }
  return {};
}

}  // namespace cameo
