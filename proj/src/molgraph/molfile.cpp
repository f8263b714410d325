#include "molgraph/molfile.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "common/config.hpp"

namespace graphmem::mol {

namespace {

std::string code_name(ParseError::Code code) {
  switch (code) {
  case ParseError::Code::kTruncated:
    return "truncated record";
  case ParseError::Code::kMalformedCounts:
    return "malformed counts line";
  case ParseError::Code::kMalformedAtom:
    return "malformed atom line";
  case ParseError::Code::kMalformedBond:
    return "malformed bond line";
  case ParseError::Code::kAtomIndexOutOfRange:
    return "atom index out of range";
  case ParseError::Code::kBadBondType:
    return "unsupported bond type";
  case ParseError::Code::kDuplicateBond:
    return "duplicate bond";
  }
  return "parse error";
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos)
      break;
    start = nl + 1;
  }
  return lines;
}

std::optional<int> parse_int(std::string_view field) {
  auto t = trim(field);
  if (t.empty())
    return std::nullopt;
  int v = 0;
  const char *b = t.data();
  if (*b == '+')
    ++b;
  auto [p, ec] = std::from_chars(b, t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    return std::nullopt;
  return v;
}

std::string_view column(std::string_view line, std::size_t start,
                        std::size_t width) {
  if (start >= line.size())
    return {};
  return line.substr(start, width);
}

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok)
    out.push_back(tok);
  return out;
}

} // namespace

ParseError::ParseError(Code code, int line, const std::string &what)
    : DataError("line " + std::to_string(line) + ": " + code_name(code) + ": "
                + what),
      code_(code), line_(line) { }

MolecularGraph parse_molfile(std::string_view text, int line_offset) {
  const auto lines = split_lines(text);
  auto lineno = [&](std::size_t idx) {
    return static_cast<int>(idx) + 1 + line_offset;
  };

  constexpr std::size_t kCountsLine = 3;
  if (lines.size() <= kCountsLine)
    throw ParseError(ParseError::Code::kTruncated,
                     lineno(lines.size() == 0 ? 0 : lines.size() - 1),
                     "missing counts line");

  const auto counts = lines[kCountsLine];
  if (counts.find("V3000") != std::string_view::npos)
    throw ParseError(ParseError::Code::kMalformedCounts, lineno(kCountsLine),
                     "V3000 connection tables are not supported");
  const auto natoms = parse_int(column(counts, 0, 3));
  const auto nbonds = parse_int(column(counts, 3, 3));
  if (!natoms || !nbonds || *natoms < 0 || *nbonds < 0)
    throw ParseError(ParseError::Code::kMalformedCounts, lineno(kCountsLine),
                     "expected atom count in columns 1-3 and bond count in "
                     "columns 4-6, got '"
                         + std::string(counts) + "'");

  const std::size_t atom_begin = kCountsLine + 1;
  const std::size_t bond_begin = atom_begin + static_cast<std::size_t>(*natoms);
  const std::size_t bond_end = bond_begin + static_cast<std::size_t>(*nbonds);
  if (lines.size() < bond_end)
    throw ParseError(ParseError::Code::kTruncated, lineno(lines.size() - 1),
                     "expected " + std::to_string(*natoms) + " atom and "
                         + std::to_string(*nbonds) + " bond lines");

  std::vector<AtomNode> atoms;
  atoms.reserve(static_cast<std::size_t>(*natoms));
  for (std::size_t k = atom_begin; k < bond_begin; ++k) {
    std::string symbol;
    if (lines[k].size() >= 32)
      symbol = trim(column(lines[k], 31, 3));
    if (symbol.empty()) {
      auto tok = tokens(lines[k]);
      if (tok.size() >= 4)
        symbol = tok[3];
    }
    if (symbol.empty())
      throw ParseError(ParseError::Code::kMalformedAtom, lineno(k),
                       "no element symbol in '" + std::string(lines[k]) + "'");
    atoms.push_back(AtomNode{symbol, 0, 0});
  }

  MolecularGraph g(std::move(atoms), kMolRelationCount);
  g.name = trim(lines[0]);

  for (std::size_t k = bond_begin; k < bond_end; ++k) {
    const auto line = lines[k];
    auto a = parse_int(column(line, 0, 3));
    auto b = parse_int(column(line, 3, 3));
    auto type = parse_int(column(line, 6, 3));
    if (!a || !b || !type) {
      auto tok = tokens(line);
      if (tok.size() >= 3) {
        a = parse_int(tok[0]);
        b = parse_int(tok[1]);
        type = parse_int(tok[2]);
      }
    }
    if (!a || !b || !type)
      throw ParseError(ParseError::Code::kMalformedBond, lineno(k),
                       "expected two atom indices and a bond type, got '"
                           + std::string(line) + "'");
    for (int idx: {*a, *b})
      if (idx < 1 || idx > *natoms)
        throw ParseError(ParseError::Code::kAtomIndexOutOfRange, lineno(k),
                         "atom index " + std::to_string(idx)
                             + " not in [1, " + std::to_string(*natoms)
                             + "]");
    if (*a == *b)
      throw ParseError(ParseError::Code::kAtomIndexOutOfRange, lineno(k),
                       "bond joins atom " + std::to_string(*a) + " to itself");
    if (*type < 1 || *type > kMolRelationCount)
      throw ParseError(ParseError::Code::kBadBondType, lineno(k),
                       "bond type " + std::to_string(*type)
                           + " is not one of 1, 2, 3, 4");
    if (g.find_edge(*a - 1, *b - 1) >= 0)
      throw ParseError(ParseError::Code::kDuplicateBond, lineno(k),
                       "atoms " + std::to_string(*a) + " and "
                           + std::to_string(*b) + " are already bonded");
    g.add_edge(*a - 1, *b - 1, *type);
  }

  // Data items, present when the text is an SDF record.
  std::size_t k = bond_end;
  while (k < lines.size() && trim(lines[k]) != "M  END")
    ++k;
  for (++k; k < lines.size(); ++k) {
    auto line = lines[k];
    if (line.empty() || line[0] != '>')
      continue;
    auto lt = line.find('<'), gt = line.rfind('>');
    if (lt == std::string_view::npos || gt == std::string_view::npos
        || gt <= lt)
      continue;
    std::string key(line.substr(lt + 1, gt - lt - 1));
    std::string value;
    for (++k; k < lines.size() && !trim(lines[k]).empty(); ++k) {
      if (!value.empty())
        value += '\n';
      value += trim(lines[k]);
    }
    g.fields[key] = value;
  }
  return g;
}

std::vector<MolecularGraph> parse_sdf(std::string_view text) {
  std::vector<MolecularGraph> out;
  const auto lines = split_lines(text);
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    bool blank = true;
    for (std::size_t k = start; k < end; ++k)
      if (!trim(lines[k]).empty())
        blank = false;
    if (blank)
      return;
    std::string record;
    for (std::size_t k = start; k < end; ++k) {
      record.append(lines[k]);
      record.push_back('\n');
    }
    out.push_back(parse_molfile(record, static_cast<int>(start)));
  };
  for (std::size_t k = 0; k < lines.size(); ++k)
    if (trim(lines[k]) == "$$$$") {
      flush(k);
      start = k + 1;
    }
  flush(lines.size());
  return out;
}

std::vector<MolecularGraph> read_sdf_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open SDF file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_sdf(ss.str());
  } catch (const ParseError &e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string write_molfile(const MolecularGraph &g) {
  std::string out = g.name + "\n  graphmem\n\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n",
                g.node_count(), g.edge_count());
  out += buf;
  for (const auto &a: g.nodes()) {
    std::snprintf(buf, sizeof buf,
                  "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  0.0, 0.0, 0.0, a.element.c_str());
    out += buf;
  }
  for (const auto &e: g.edges()) {
    if (e.relation < 1 || e.relation > kMolRelationCount)
      throw GraphError("relation " + std::to_string(e.relation)
                       + " cannot be written as a V2000 bond type");
    std::snprintf(buf, sizeof buf, "%3d%3d%3d  0  0  0  0\n", e.i + 1, e.j + 1,
                  e.relation);
    out += buf;
  }
  out += "M  END\n";
  return out;
}

} // namespace graphmem::mol
