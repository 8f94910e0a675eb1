// Copyright 2026 The bellsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

namespace bellsim::report {

using json = nlohmann::json;

/// Shortest round-trip decimal form, '.' separator, locale-independent.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

/// UTF-8 CSV with a header row. Cells are pre-formatted strings; use
/// format_double for numeric cells.
inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw std::invalid_argument("write_csv: row width does not match header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
}

inline void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << doc.dump(2) << '\n';
}

namespace detail {

inline bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

}  // namespace detail

/// Validates a document against the subset of JSON Schema the shipped
/// report schema uses: type, required, properties, items, enum. Returns
/// false and fills `error` (if given) on the first violation.
inline bool validate_schema(const json& doc, const json& schema, std::string* error,
                            const std::string& where = "$") {
  auto fail = [&](const std::string& message) {
    if (error) *error = where + ": " + message;
    return false;
  };

  if (schema.contains("enum")) {
    for (const auto& candidate : schema["enum"]) {
      if (doc == candidate) return true;
    }
    return fail("value not in enum");
  }
  if (schema.contains("type") && !detail::type_matches(doc, schema["type"].get<std::string>())) {
    return fail("expected type " + schema["type"].get<std::string>());
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!doc.contains(key.get<std::string>())) {
        return fail("missing required property '" + key.get<std::string>() + "'");
      }
    }
  }
  if (schema.contains("properties") && doc.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (doc.contains(key) &&
          !validate_schema(doc.at(key), sub, error, where + "." + key)) {
        return false;
      }
    }
  }
  if (schema.contains("items") && doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (!validate_schema(doc[i], schema["items"], error,
                           where + "[" + std::to_string(i) + "]")) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace bellsim::report
