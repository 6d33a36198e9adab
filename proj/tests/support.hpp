#pragma once

#include <string>

#include "thurston/json_io.hpp"

namespace thurston::test {

inline std::string fixture(const std::string& relative) { return std::string(THURSTON_FIXTURES) + "/" + relative; }

inline nlohmann::json load(const std::string& relative) { return json_io::read_file(fixture(relative)); }

}  // namespace thurston::test
