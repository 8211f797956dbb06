#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairdyn {

/// Checks `doc` against a JSON Schema using the keyword subset the shipped
/// schemas need: type, enum, const, required, properties,
/// additionalProperties, items, minItems, minimum, maximum, minLength,
/// anyOf and local "#/definitions/..." references. Returns
/// one message per violation, each prefixed with its JSON pointer.
std::vector<std::string> validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema);

/// The audit report schema shipped in schema/, compiled into the library.
const nlohmann::json& audit_report_schema();

/// Reads a schema file; throws ParseError naming the file on bad JSON.
nlohmann::json load_schema(const std::filesystem::path& path);

}  // namespace fairdyn
