#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace lfforge::schema {

struct Violation {
  std::string path;  ///< JSON-pointer style, "" for the document root
  std::string message;
};

/// Validates `doc` against the subset of JSON Schema used by the published
/// documents: type, properties, required, additionalProperties, items,
/// minItems, maxItems, enum, const, minimum, maximum, exclusiveMinimum,
/// exclusiveMaximum, minLength, oneOf and local "$ref" into "$defs".
std::vector<Violation> validate(const nlohmann::json& doc, const nlohmann::json& schema);

}  // namespace lfforge::schema
