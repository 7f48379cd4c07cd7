#include "lfforge/json_schema.hpp"

#include <cmath>

namespace lfforge::schema {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& v, const json& s, const std::string& path, std::vector<Violation>& out) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) out.push_back({path, "no value is allowed here"});
      return;
    }
    if (auto it = s.find("$ref"); it != s.end()) {
      check(v, resolve(it->get<std::string>()), path, out);
      return;
    }
    if (auto it = s.find("type"); it != s.end()) {
      bool ok = false;
      if (it->is_string()) ok = has_type(v, it->get<std::string>());
      else
        for (const auto& t : *it) ok = ok || has_type(v, t.get<std::string>());
      if (!ok) {
        out.push_back({path, "expected type " + it->dump()});
        return;
      }
    }
    if (auto it = s.find("enum"); it != s.end()) {
      bool ok = false;
      for (const auto& e : *it) ok = ok || e == v;
      if (!ok) out.push_back({path, "value " + v.dump() + " not in " + it->dump()});
    }
    if (auto it = s.find("const"); it != s.end() && *it != v)
      out.push_back({path, "value must equal " + it->dump()});
    if (v.is_number()) {
      const double x = v.get<double>();
      if (auto it = s.find("minimum"); it != s.end() && x < it->get<double>())
        out.push_back({path, "must be >= " + it->dump()});
      if (auto it = s.find("maximum"); it != s.end() && x > it->get<double>())
        out.push_back({path, "must be <= " + it->dump()});
      if (auto it = s.find("exclusiveMinimum"); it != s.end() && x <= it->get<double>())
        out.push_back({path, "must be > " + it->dump()});
      if (auto it = s.find("exclusiveMaximum"); it != s.end() && x >= it->get<double>())
        out.push_back({path, "must be < " + it->dump()});
    }
    if (v.is_string())
      if (auto it = s.find("minLength"); it != s.end() && v.get<std::string>().size() < it->get<std::size_t>())
        out.push_back({path, "string shorter than " + it->dump()});
    if (v.is_array()) {
      if (auto it = s.find("minItems"); it != s.end() && v.size() < it->get<std::size_t>())
        out.push_back({path, "fewer than " + it->dump() + " items"});
      if (auto it = s.find("maxItems"); it != s.end() && v.size() > it->get<std::size_t>())
        out.push_back({path, "more than " + it->dump() + " items"});
      if (auto it = s.find("items"); it != s.end())
        for (std::size_t i = 0; i < v.size(); ++i) check(v[i], *it, path + "/" + std::to_string(i), out);
    }
    if (v.is_object()) {
      if (auto it = s.find("required"); it != s.end())
        for (const auto& r : *it)
          if (!v.contains(r.get<std::string>()))
            out.push_back({path + "/" + escape_token(r.get<std::string>()), "required property missing"});
      const auto props = s.find("properties");
      const auto extra = s.find("additionalProperties");
      for (const auto& [key, child] : v.items()) {
        const std::string child_path = path + "/" + escape_token(key);
        if (props != s.end() && props->contains(key)) {
          check(child, (*props)[key], child_path, out);
        } else if (extra != s.end()) {
          if (extra->is_boolean() && !extra->get<bool>())
            out.push_back({child_path, "unknown property"});
          else
            check(child, *extra, child_path, out);
        }
      }
    }
    if (auto it = s.find("oneOf"); it != s.end()) {
      int matches = 0;
      for (const auto& alt : *it) {
        std::vector<Violation> tmp;
        check(v, alt, path, tmp);
        matches += tmp.empty();
      }
      if (matches != 1) out.push_back({path, "must match exactly one alternative"});
    }
  }

 private:
  const json& resolve(const std::string& ref) const {
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) throw std::invalid_argument("unsupported $ref " + ref);
    return root_.at("$defs").at(ref.substr(prefix.size()));
  }
  const json& root_;
};

}  // namespace

std::vector<Violation> validate(const nlohmann::json& doc, const nlohmann::json& schema) {
  std::vector<Violation> out;
  Validator(schema).check(doc, schema, "", out);
  return out;
}

}  // namespace lfforge::schema
