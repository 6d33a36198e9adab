#include "thurston/json_io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "thurston/error.hpp"

namespace thurston::json_io {

void require_only_keys(const json& object, std::initializer_list<std::string_view> allowed,
                       std::string_view context) {
  if (!object.is_object()) {
    throw Error(ErrorCode::ParseError, std::string(context) + ": expected a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    bool ok = false;
    for (const auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::ParseError, std::string(context) + ": unknown field '" + key + "'");
  }
}

const json& require_key(const json& object, std::string_view key, std::string_view context) {
  const auto it = object.find(std::string(key));
  if (it == object.end()) {
    throw Error(ErrorCode::ParseError, std::string(context) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

json complex_to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_from_json(const json& j) {
  require_only_keys(j, {"re", "im"}, "complex");
  try {
    return {require_key(j, "re", "complex").get<double>(), require_key(j, "im", "complex").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("complex: ") + e.what());
  }
}

json point_to_json(const SpherePoint& p) {
  if (p.at_infinity) return "inf";
  return complex_to_json(p.z);
}

SpherePoint point_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return SpherePoint::infinity();
    throw Error(ErrorCode::ParseError, "point: expected {re,im} or \"inf\"");
  }
  return SpherePoint(complex_from_json(j));
}

json map_to_json(const RealizedMap& g) {
  json num = json::array();
  json den = json::array();
  for (const auto c : g.num().coeffs()) num.push_back(complex_to_json(c));
  for (const auto c : g.den().coeffs()) den.push_back(complex_to_json(c));
  return json{{"num", num}, {"den", den}};
}

RealizedMap map_from_json(const json& j) {
  require_only_keys(j, {"num", "den"}, "map");
  auto read = [](const json& arr) {
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "map: coefficient list must be an array");
    std::vector<Complex> c;
    for (const auto& x : arr) c.push_back(complex_from_json(x));
    return Polynomial(std::move(c));
  };
  return RealizedMap(read(require_key(j, "num", "map")), read(require_key(j, "den", "map")));
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char ch;
  while (in.get(ch)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace thurston::json_io
