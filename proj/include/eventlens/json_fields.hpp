#pragma once

#include <functional>
#include <map>
#include <string>

#include <json.hpp>

namespace eventlens {

using FieldReader = std::function<void(const nlohmann::ordered_json&)>;

/// Applies one reader per known key of object `j`. Unknown keys, non-objects
/// and JSON type mismatches become ValidationError mentioning `where`.
void read_object(const nlohmann::ordered_json& j, const std::string& where,
                 const std::map<std::string, FieldReader>& fields);

}  // namespace eventlens
