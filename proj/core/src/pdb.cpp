#include "adp/pdb.hpp"

#include "adp/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unistd.h>

namespace adp {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && s[b] == ' ') ++b;
  while (e > b && s[e - 1] == ' ') --e;
  return std::string(s.substr(b, e - b));
}

// 1-based inclusive PDB columns.
std::string_view columns(std::string_view line, int first, int last) {
  const auto begin = static_cast<std::size_t>(first - 1);
  if (begin >= line.size()) return {};
  return line.substr(begin, std::min(line.size(), static_cast<std::size_t>(last)) - begin);
}

double parse_coordinate(std::string_view line, int first, int last, int line_no) {
  const std::string field = trim(columns(line, first, last));
  if (field.empty())
    throw ParseError("line " + std::to_string(line_no) + ": missing coordinate in columns " +
                     std::to_string(first) + "-" + std::to_string(last));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": malformed coordinate '" + field + "'");
  return v;
}

int parse_residue_number(std::string_view line, int line_no) {
  const std::string field = trim(columns(line, 23, 26));
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (field.empty() || used != field.size())
    throw ParseError("line " + std::to_string(line_no) + ": malformed residue number '" + field + "'");
  return v;
}

struct ResidueAtoms {
  std::string name;
  std::array<std::optional<Eigen::RowVector3d>, kAtomsPerResidue> atoms;
};

}  // namespace

BackboneChain parse_backbone(std::string_view text) {
  std::map<std::pair<int, char>, ResidueAtoms> residues;  // (number, insertion code)
  std::vector<std::pair<int, char>> file_order;
  std::optional<char> chain;
  bool any_atom = false;
  bool model_done = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size() && !model_done) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view record = columns(line, 1, 6);
    if (record.rfind("ENDMDL", 0) == 0) {
      if (any_atom) model_done = true;
      continue;
    }
    if (record.rfind("ATOM", 0) != 0 || (record.size() > 4 && record.substr(4) != "  ")) continue;
    if (line.size() < 54) throw ParseError("line " + std::to_string(line_no) + ": ATOM record shorter than 54 columns");
    const char chain_id = line[21];
    if (!chain) chain = chain_id;
    if (chain_id != *chain) continue;
    const std::string atom = trim(columns(line, 13, 16));
    const int number = parse_residue_number(line, line_no);
    const char icode = line[26];
    const double x = parse_coordinate(line, 31, 38, line_no);
    const double y = parse_coordinate(line, 39, 46, line_no);
    const double z = parse_coordinate(line, 47, 54, line_no);
    any_atom = true;
    int slot = -1;
    for (int a = 0; a < kAtomsPerResidue; ++a)
      if (atom == kBackboneAtomNames[static_cast<std::size_t>(a)]) slot = a;
    const auto key = std::make_pair(number, icode);
    auto [it, inserted] = residues.try_emplace(key);
    if (inserted) {
      file_order.push_back(key);
      it->second.name = trim(columns(line, 18, 20));
    }
    if (slot < 0) continue;
    auto& stored = it->second.atoms[static_cast<std::size_t>(slot)];
    if (stored) continue;  // keep the first alternate location
    stored = Eigen::RowVector3d(x, y, z);
  }
  if (!any_atom) throw ParseError("no ATOM records found");

  if (!std::is_sorted(file_order.begin(), file_order.end()))
    spdlog::warn("PDB residue numbering is not monotonic; residues reordered by sequence number");

  // Residues in sequence order with unmodeled placeholders for numbering gaps.
  std::vector<std::pair<int, const ResidueAtoms*>> ordered;
  int previous = 0;
  bool first = true;
  for (const auto& [key, atoms] : residues) {
    if (!first)
      for (int gap = previous + 1; gap < key.first; ++gap) ordered.emplace_back(gap, nullptr);
    ordered.emplace_back(key.first, &atoms);
    previous = key.first;
    first = false;
  }

  BackboneChain out(static_cast<int>(ordered.size()));
  out.chain_id = chain.value_or('A');
  for (std::size_t r = 0; r < ordered.size(); ++r) {
    const auto [number, atoms] = ordered[r];
    out.residue_numbers[r] = number;
    bool complete = atoms != nullptr;
    if (atoms) {
      out.residue_names[r] = atoms->name.empty() ? "UNK" : atoms->name;
      for (int a = 0; a < kAtomsPerResidue; ++a) {
        const auto& xyz = atoms->atoms[static_cast<std::size_t>(a)];
        if (xyz) out.coords.row(kAtomsPerResidue * static_cast<int>(r) + a) = *xyz;
        else complete = false;
      }
    } else {
      out.residue_names[r] = "UNK";
    }
    for (int a = 0; a < kAtomsPerResidue; ++a)
      out.present[static_cast<std::size_t>(kAtomsPerResidue) * r + static_cast<std::size_t>(a)] = complete ? 1 : 0;
  }
  out.validate();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BackboneChain read_backbone(const std::string& path) { return parse_backbone(read_file(path)); }

std::string format_backbone(const BackboneChain& chain) {
  chain.validate();
  std::string out;
  char line[96];
  int serial = 1;
  for (int r = 0; r < chain.n_residues; ++r) {
    for (int a = 0; a < kAtomsPerResidue; ++a) {
      const int row = kAtomsPerResidue * r + a;
      if (!chain.present[static_cast<std::size_t>(row)]) continue;
      const char* name = kBackboneAtomNames[static_cast<std::size_t>(a)];
      const char element = name[0];
      // Atom names of up to 3 characters start in column 14.
      std::snprintf(line, sizeof(line), "ATOM  %5d  %-3s %3.3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2c\n",
                    serial++ % 100000, name, chain.residue_names[static_cast<std::size_t>(r)].c_str(),
                    chain.chain_id, chain.residue_numbers[static_cast<std::size_t>(r)] % 10000,
                    chain.coords(row, 0), chain.coords(row, 1), chain.coords(row, 2), 1.0, 0.0, element);
      out += line;
    }
  }
  out += "TER\nEND\n";
  return out;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    std::remove(tmp.c_str());
    throw Error("cannot rename " + tmp + " to " + path + ": " + why);
  }
}

void write_backbone(const BackboneChain& chain, const std::string& path) {
  write_file_atomic(path, format_backbone(chain));
}

}  // namespace adp
