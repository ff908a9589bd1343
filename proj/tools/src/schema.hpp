#pragma once

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

namespace drm::cli {

enum class Kind { Integer, Number, Boolean, String, Object, Array, ProblemSpec };

struct Key {
  const char* name;
  Kind kind;
  bool required = false;
};

/// Rejects non-objects, unknown keys, missing required keys and type mismatches.
void check_schema(const nlohmann::json& j, std::initializer_list<Key> keys, const std::string& where);

}  // namespace drm::cli
