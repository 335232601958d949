#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cameo {

/// Payload type of a channel item or port: a closed set of names, lists `[T]` and
/// tuples `(T, U, ...)`.
struct SemType {
  enum class Kind { Named, List, Tuple };

  Kind kind = Kind::Named;
  std::string name;            // Named
  std::vector<SemType> parts;  // List: one element type; Tuple: two or more

  static SemType named(std::string n) { return {Kind::Named, std::move(n), {}}; }
  static SemType list_of(SemType element) { return {Kind::List, {}, {std::move(element)}}; }
  static SemType tuple_of(std::vector<SemType> parts) { return {Kind::Tuple, {}, std::move(parts)}; }

  bool is_list() const { return kind == Kind::List; }
  bool is_tuple() const { return kind == Kind::Tuple; }
  const SemType& element() const { return parts.front(); }

  bool operator==(const SemType&) const = default;
};

inline constexpr std::string_view kSemanticTypeNames[] = {
    "ScenarioSet", "ScenarioTree", "BatteryConfig", "WindFarmSite",
    "HistoricalRecord", "DesignResult", "FileRef", "Scalar"};

bool is_semantic_type_name(std::string_view name);

/// Parses `Name`, `[T]` or `(T, U, ...)`; unknown names and malformed text throw SchemaError.
SemType parse_semtype(std::string_view text);
std::string to_string(const SemType& t);

/// Type of a cross-product item: tuple parts of both sides concatenated.
SemType cross_type(const SemType& left, const SemType& right);
SemType collect_type(const SemType& t);
/// Element type of a list; SchemaError for anything else.
SemType flatten_type(const SemType& t);

}  // namespace cameo
