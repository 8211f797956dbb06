#include "fairdyn/schema.hpp"

#include <algorithm>
#include <fstream>

#include "fairdyn/audit_schema.hpp"
#include "fairdyn/core.hpp"

namespace fairdyn {

using nlohmann::json;

namespace {

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  if (type == "number") return v.is_number();
  throw ValidationError("schema uses unsupported type \"" + type + "\"");
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& v, const json& schema, const std::string& path) {
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) errors_.push_back(path + ": no value allowed");
      return;
    }
    if (schema.contains("$ref")) {
      check(v, resolve(schema["$ref"].get<std::string>()), path);
      return;
    }
    if (schema.contains("type")) {
      const auto& t = schema["type"];
      bool ok = false;
      if (t.is_array()) {
        for (const auto& one : t) ok = ok || has_type(v, one.get<std::string>());
      } else {
        ok = has_type(v, t.get<std::string>());
      }
      if (!ok) {
        errors_.push_back(path + ": expected type " + t.dump() + ", found " + v.type_name());
        return;
      }
    }
    if (schema.contains("const") && v != schema["const"]) errors_.push_back(path + ": expected " + schema["const"].dump());
    if (schema.contains("enum")) {
      const auto& options = schema["enum"];
      if (std::find(options.begin(), options.end(), v) == options.end()) {
        errors_.push_back(path + ": value " + v.dump() + " not in " + options.dump());
      }
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
        errors_.push_back(path + ": below minimum " + schema["minimum"].dump());
      }
      if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
        errors_.push_back(path + ": above maximum " + schema["maximum"].dump());
      }
    }
    if (v.is_string() && schema.contains("minLength") &&
        v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
      errors_.push_back(path + ": string shorter than " + schema["minLength"].dump());
    }
    if (v.is_object()) check_object(v, schema, path);
    if (v.is_array()) {
      if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
        errors_.push_back(path + ": fewer than " + schema["minItems"].dump() + " items");
      }
      if (schema.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) check(v[i], schema["items"], path + "/" + std::to_string(i));
      }
    }
    if (schema.contains("anyOf")) {
      bool any = false;
      for (const auto& option : schema["anyOf"]) {
        Validator sub(root_);
        sub.check(v, option, path);
        if (sub.errors_.empty()) {
          any = true;
          break;
        }
      }
      if (!any) errors_.push_back(path + ": matches none of the anyOf alternatives");
    }
  }

  std::vector<std::string> take() { return std::move(errors_); }

 private:
  void check_object(const json& v, const json& schema, const std::string& path) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>())) errors_.push_back(path + ": missing required key " + key.dump());
      }
    }
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path + "/" + it.key();
      if (props.contains(it.key())) {
        check(it.value(), props[it.key()], child);
      } else if (schema.contains("additionalProperties")) {
        check(it.value(), schema["additionalProperties"], child);
      }
    }
  }

  const json& resolve(const std::string& ref) {
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0) throw ValidationError("unsupported schema reference " + ref);
    const auto name = ref.substr(prefix.size());
    if (!root_.contains("definitions") || !root_["definitions"].contains(name)) {
      throw ValidationError("unresolved schema reference " + ref);
    }
    return root_["definitions"][name];
  }

  const json& root_;
  std::vector<std::string> errors_;
};

}  // namespace

std::vector<std::string> validate_against_schema(const json& doc, const json& schema) {
  Validator v(schema);
  v.check(doc, schema, "");
  return v.take();
}

const json& audit_report_schema() {
  static const json schema = json::parse(generated::kAuditReportSchema);
  return schema;
}

json load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open schema file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

}  // namespace fairdyn
