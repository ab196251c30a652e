#pragma once

#include <yaml-cpp/yaml.h>

#include <string>
#include <string_view>

#include "projmap/detail/text.hpp"
#include "projmap/errors.hpp"

// Thin helpers that turn yaml-cpp failures into ParseError with line numbers.
namespace projmap::detail {

inline YAML::Node load_yaml(std::string_view bytes) {
  try {
    return YAML::Load(std::string(bytes));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line) + 1);
  }
}

inline std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

inline YAML::Node require(const YAML::Node& map, const char* key) {
  if (!map.IsMap()) throw ParseError("expected a mapping", line_of(map), 0, key);
  YAML::Node node = map[key];
  if (!node) throw ParseError("missing required key", line_of(map), 0, key);
  return node;
}

template <typename Number>
Number as_number(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ParseError("expected a number", line_of(node), 0, field);
  auto value = parse_number<Number>(trim(node.Scalar()));
  if (!value) {
    throw ParseError("not a valid number: '" + node.Scalar() + "'",
                     line_of(node), 0, field);
  }
  return *value;
}

inline std::string as_string(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ParseError("expected a string", line_of(node), 0, field);
  return node.Scalar();
}

template <typename Number>
std::vector<Number> as_numbers(const YAML::Node& node, const std::string& field,
                               std::size_t expected_size) {
  if (!node.IsSequence()) throw ParseError("expected a list", line_of(node), 0, field);
  if (node.size() != expected_size) {
    throw ParseError("expected " + std::to_string(expected_size) +
                         " entries, got " + std::to_string(node.size()),
                     line_of(node), 0, field);
  }
  std::vector<Number> out;
  out.reserve(expected_size);
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(as_number<Number>(node[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace projmap::detail
