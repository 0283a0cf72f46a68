#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tjm/jacobi.hpp"

namespace tjm {

class FileFormatError : public Error {
 public:
  using Error::Error;
};

// Textual structure document (JSON). Keys: `coordinates` (list of
// identifiers), `bivector` (map "(i,j)" -> expression, i < j), `vector` (list
// of dim expressions), `omega` (map "(i,j)" -> expression), optional
// `constraints` (list of expressions required nonzero).
struct StructureFile {
  std::vector<std::string> coordinates;
  std::map<std::pair<int, int>, std::string> bivector;
  std::vector<std::string> vector_field;
  std::map<std::pair<int, int>, std::string> omega;
  std::vector<std::string> constraints;
};

StructureFile read_structure_file(std::istream& in);
StructureFile read_structure_file_from_path(const std::string& path);
void write_structure_file(std::ostream& out, const StructureFile& f);

// Parses every expression against the declared coordinates and assembles the
// structure; indices out of range or not increasing raise FileFormatError,
// expression problems raise ParseError.
TwistedJacobiStructure instantiate(const StructureFile& f);

StructureFile to_structure_file(const TwistedJacobiStructure& s);

}  // namespace tjm
