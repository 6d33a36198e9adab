#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "thurston/polynomial.hpp"
#include "thurston/rational_map.hpp"
#include "thurston/sphere.hpp"

namespace thurston::json_io {

using nlohmann::json;

/// Throws ParseError if `object` has a key outside `allowed` or is not an object.
void require_only_keys(const json& object, std::initializer_list<std::string_view> allowed,
                       std::string_view context);
/// Throws ParseError if `key` is missing.
const json& require_key(const json& object, std::string_view key, std::string_view context);

json complex_to_json(Complex z);
Complex complex_from_json(const json& j);

/// {re, im} or the string "inf".
json point_to_json(const SpherePoint& p);
SpherePoint point_from_json(const json& j);

/// {"num": [{re,im}...], "den": [...]}; index k is the coefficient of z^k.
json map_to_json(const RealizedMap& g);
RealizedMap map_from_json(const json& j);

json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const json& j);

/// Hex digest (FNV-1a 64) of a file's bytes; used to stamp provenance into outputs.
std::string file_digest(const std::filesystem::path& path);

}  // namespace thurston::json_io
