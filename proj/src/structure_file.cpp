#include "tjm/structure_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tjm {

namespace {

using nlohmann::json;

std::pair<int, int> parse_tuple_key(const std::string& key) {
  // exact shape "(i,j)"
  if (key.size() < 5 || key.front() != '(' || key.back() != ')')
    throw FileFormatError("malformed tuple key '" + key + "' (expected \"(i,j)\")");
  const std::string inner = key.substr(1, key.size() - 2);
  const std::size_t comma = inner.find(',');
  if (comma == std::string::npos)
    throw FileFormatError("malformed tuple key '" + key + "' (expected \"(i,j)\")");
  try {
    std::size_t used_i = 0, used_j = 0;
    const std::string si = inner.substr(0, comma);
    const std::string sj = inner.substr(comma + 1);
    const int i = std::stoi(si, &used_i);
    const int j = std::stoi(sj, &used_j);
    if (used_i != si.size() || used_j != sj.size())
      throw FileFormatError("malformed tuple key '" + key + "'");
    return {i, j};
  } catch (const FileFormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FileFormatError("malformed tuple key '" + key + "'");
  }
}

std::map<std::pair<int, int>, std::string> read_tuple_map(const json& j, const char* what) {
  if (!j.is_object()) throw FileFormatError(std::string(what) + " must be a map");
  std::map<std::pair<int, int>, std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string())
      throw FileFormatError(std::string(what) + " entry '" + key + "' must be a string");
    out.emplace(parse_tuple_key(key), value.get<std::string>());
  }
  return out;
}

}  // namespace

StructureFile read_structure_file(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FileFormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FileFormatError("structure file must be a JSON object");

  StructureFile f;
  if (!j.contains("coordinates") || !j["coordinates"].is_array())
    throw FileFormatError("missing 'coordinates' list");
  for (const auto& name : j["coordinates"]) {
    if (!name.is_string()) throw FileFormatError("coordinate names must be strings");
    f.coordinates.push_back(name.get<std::string>());
  }

  if (j.contains("bivector")) f.bivector = read_tuple_map(j["bivector"], "bivector");
  if (j.contains("omega")) f.omega = read_tuple_map(j["omega"], "omega");

  if (j.contains("vector")) {
    if (!j["vector"].is_array()) throw FileFormatError("'vector' must be a list");
    for (const auto& e : j["vector"]) {
      if (!e.is_string()) throw FileFormatError("vector entries must be strings");
      f.vector_field.push_back(e.get<std::string>());
    }
  }
  if (j.contains("constraints")) {
    if (!j["constraints"].is_array()) throw FileFormatError("'constraints' must be a list");
    for (const auto& e : j["constraints"]) {
      if (!e.is_string()) throw FileFormatError("constraint entries must be strings");
      f.constraints.push_back(e.get<std::string>());
    }
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "coordinates" && key != "bivector" && key != "vector" && key != "omega" &&
        key != "constraints")
      throw FileFormatError("unknown key '" + key + "'");
  }
  return f;
}

StructureFile read_structure_file_from_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open '" + path + "'");
  return read_structure_file(in);
}

void write_structure_file(std::ostream& out, const StructureFile& f) {
  json j;
  j["coordinates"] = f.coordinates;
  json biv = json::object();
  for (const auto& [key, value] : f.bivector)
    biv["(" + std::to_string(key.first) + "," + std::to_string(key.second) + ")"] = value;
  j["bivector"] = biv;
  j["vector"] = f.vector_field;
  json om = json::object();
  for (const auto& [key, value] : f.omega)
    om["(" + std::to_string(key.first) + "," + std::to_string(key.second) + ")"] = value;
  j["omega"] = om;
  if (!f.constraints.empty()) j["constraints"] = f.constraints;
  out << j.dump(2) << "\n";
}

TwistedJacobiStructure instantiate(const StructureFile& f) {
  if (f.coordinates.empty()) throw FileFormatError("empty coordinate list");
  Chart chart(f.coordinates);
  const int n = chart.dim();

  auto check_indices = [&](const std::pair<int, int>& key, const char* what) {
    if (key.first < 0 || key.second < 0 || key.first >= n || key.second >= n)
      throw FileFormatError(std::string(what) + " index out of range in (" +
                            std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    if (key.first >= key.second)
      throw FileFormatError(std::string(what) + " indices not increasing in (" +
                            std::to_string(key.first) + "," + std::to_string(key.second) + ")");
  };

  Multivector lambda(chart, 2);
  for (const auto& [key, text] : f.bivector) {
    check_indices(key, "bivector");
    lambda.set({key.first, key.second}, parse(text, chart));
  }

  Multivector e(chart, 1);
  if (!f.vector_field.empty()) {
    if (static_cast<int>(f.vector_field.size()) != n)
      throw FileFormatError("'vector' must list exactly dim expressions");
    for (int i = 0; i < n; ++i) e.set({i}, parse(f.vector_field[static_cast<std::size_t>(i)], chart));
  }

  DiffForm omega(chart, 2);
  for (const auto& [key, text] : f.omega) {
    check_indices(key, "omega");
    omega.set({key.first, key.second}, parse(text, chart));
  }

  for (const auto& text : f.constraints) chart.add_constraint(parse(text, chart));

  return TwistedJacobiStructure(chart, lambda, e, omega);
}

StructureFile to_structure_file(const TwistedJacobiStructure& s) {
  StructureFile f;
  f.coordinates = s.chart.names();
  for (const auto& [idx, v] : s.lambda.coeffs())
    f.bivector.emplace(std::make_pair(idx[0], idx[1]), v.str());
  for (int i = 0; i < s.chart.dim(); ++i) f.vector_field.push_back(s.e_field.coeff({i}).str());
  for (const auto& [idx, v] : s.omega.coeffs())
    f.omega.emplace(std::make_pair(idx[0], idx[1]), v.str());
  for (const auto& c : s.chart.constraints()) f.constraints.push_back(c.str());
  return f;
}

}  // namespace tjm
