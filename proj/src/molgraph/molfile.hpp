#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "molgraph/graph.hpp"

namespace graphmem::mol {

// Bond type codes in a V2000 bond block; they double as relation ids.
inline constexpr int kMolRelationCount = 4;

class ParseError : public DataError {
public:
  enum class Code {
    kTruncated,
    kMalformedCounts,
    kMalformedAtom,
    kMalformedBond,
    kAtomIndexOutOfRange,
    kBadBondType,
    kDuplicateBond,
  };

  ParseError(Code code, int line, const std::string &what);

  Code code() const noexcept { return code_; }
  // 1-based line number within the parsed text.
  int line() const noexcept { return line_; }

private:
  Code code_;
  int line_;
};

// Parses one MOL V2000 connection table (header block, counts line, atom and
// bond blocks). Coordinates, charges, stereo and property lines are read
// past and discarded. line_offset shifts reported line numbers, for records
// embedded in a larger SDF file.
MolecularGraph parse_molfile(std::string_view text, int line_offset = 0);

// Splits on "$$$$" lines and parses each record; data items ("> <KEY>")
// land in MolecularGraph::fields and the first header line in name.
std::vector<MolecularGraph> parse_sdf(std::string_view text);
std::vector<MolecularGraph> read_sdf_file(const std::string &path);

// Fixed-column V2000 record (zero coordinates) terminated by "M  END".
// Relations must lie in 1..4.
std::string write_molfile(const MolecularGraph &g);

} // namespace graphmem::mol
