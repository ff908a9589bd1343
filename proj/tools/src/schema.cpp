#include "schema.hpp"

#include "drm/errors.hpp"

namespace drm::cli {

namespace {

bool matches(const nlohmann::json& v, Kind k) {
  switch (k) {
    case Kind::Integer: return v.is_number_integer();
    case Kind::Number: return v.is_number();
    case Kind::Boolean: return v.is_boolean();
    case Kind::String: return v.is_string();
    case Kind::Object: return v.is_object();
    case Kind::Array: return v.is_array();
    case Kind::ProblemSpec: return v.is_string() || v.is_object();
  }
  return false;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Integer: return "an integer";
    case Kind::Number: return "a number";
    case Kind::Boolean: return "a boolean";
    case Kind::String: return "a string";
    case Kind::Object: return "an object";
    case Kind::Array: return "an array";
    case Kind::ProblemSpec: return "a problem name or object";
  }
  return "?";
}

}  // namespace

void check_schema(const nlohmann::json& j, std::initializer_list<Key> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Key* found = nullptr;
    for (const Key& k : keys) {
      if (it.key() == k.name) found = &k;
    }
    if (!found) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    if (!matches(it.value(), found->kind)) {
      throw ConfigError(where + ": '" + it.key() + "' must be " + kind_name(found->kind));
    }
  }
  for (const Key& k : keys) {
    if (k.required && !j.contains(k.name)) throw ConfigError(where + ": missing required key '" + k.name + "'");
  }
}

}  // namespace drm::cli
