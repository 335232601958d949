#include "cameo/semtype.hpp"

#include <algorithm>
#include <cctype>

#include "cameo/errors.hpp"
#include "cameo/util.hpp"

namespace cameo {

bool is_semantic_type_name(std::string_view name) {
  return std::find(std::begin(kSemanticTypeNames), std::end(kSemanticTypeNames), name) !=
         std::end(kSemanticTypeNames);
}

namespace {

class TypeParser {
 public:
  explicit TypeParser(std::string_view text) : text_(text) {}

  SemType parse() {
    SemType t = type();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return t;
  }

 private:
  SemType type() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] == '[') {
      ++pos_;
      SemType element = type();
      expect(']');
      return SemType::list_of(std::move(element));
    }
    if (text_[pos_] == '(') {
      ++pos_;
      std::vector<SemType> parts{type()};
      skip_space();
      while (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        parts.push_back(type());
        skip_space();
      }
      expect(')');
      if (parts.size() < 2) fail("a tuple needs at least two parts");
      return SemType::tuple_of(std::move(parts));
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name.empty()) fail("expected a type name");
    if (!is_semantic_type_name(name)) fail("unknown semantic type '" + name + "'");
    return SemType::named(std::move(name));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("type '" + std::string(text_) + "': " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SemType parse_semtype(std::string_view text) { return TypeParser(text).parse(); }

std::string to_string(const SemType& t) {
  switch (t.kind) {
    case SemType::Kind::Named:
      return t.name;
    case SemType::Kind::List:
      return "[" + to_string(t.element()) + "]";
    case SemType::Kind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < t.parts.size(); ++i) out += (i ? "," : "") + to_string(t.parts[i]);
      return out + ")";
    }
  }
  return {};
}

SemType cross_type(const SemType& left, const SemType& right) {
  std::vector<SemType> parts;
  for (const SemType* side : {&left, &right}) {
    if (side->is_tuple())
      parts.insert(parts.end(), side->parts.begin(), side->parts.end());
    else
      parts.push_back(*side);
  }
  return SemType::tuple_of(std::move(parts));
}

SemType collect_type(const SemType& t) { return SemType::list_of(t); }

SemType flatten_type(const SemType& t) {
  if (!t.is_list()) throw SchemaError("flatten of non-list type " + to_string(t));
  return t.element();
}

}  // namespace cameo
