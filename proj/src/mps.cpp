#include "layover/mps.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "layover/errors.hpp"

namespace layover {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fields start at columns 2, 5, 15, 25, 40, 50 (1-based).
std::string line(const std::string& f1, const std::string& f2, const std::string& f3 = "", const std::string& f4 = "",
                 const std::string& f5 = "", const std::string& f6 = "") {
  std::string s(61, ' ');
  auto put = [&](std::size_t col, const std::string& v) { s.replace(col - 1, v.size(), v); };
  put(2, f1);
  put(5, f2);
  put(15, f3);
  put(25, f4);
  put(40, f5);
  put(50, f6);
  const auto end = s.find_last_not_of(' ');
  s.resize(end == std::string::npos ? 0 : end + 1);
  return s;
}

std::vector<std::string> tokens(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) throw ParseError(where + ": bad number '" + text + "'");
  return v;
}

}  // namespace

std::string mps_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.size() <= 12) return s;
  for (int prec = 12; prec > 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strlen(buf) <= 12) return buf;
  }
  throw ValidationError("value does not fit an MPS field: " + s);
}

MpsModel to_mps_model(const LayoverProblem& problem, const std::string& name) {
  MpsModel m;
  m.name = name;
  m.negated_max = true;
  const std::size_t rows = problem.constraint_rows();
  for (std::size_t r = 0; r < rows; ++r) {
    m.row_names.push_back(problem.row_name(r));
    m.row_type.push_back(problem.sense[r] == RowSense::LessEqual ? 'L' : problem.sense[r] == RowSense::Equal ? 'E' : 'G');
  }
  m.rhs = problem.rhs;
  for (std::size_t c = 0; c < problem.variables(); ++c) {
    m.col_names.push_back(problem.column_name(c));
    m.cost.push_back(problem.objective[c] == 0.0 ? 0.0 : -problem.objective[c]);
  }
  m.lower = problem.lower;
  m.upper = problem.upper;
  m.is_integer = problem.is_integer;
  m.rows = problem.rows;
  return m;
}

void write_mps(const MpsModel& model, std::ostream& out) {
  const std::size_t ncol = model.col_names.size();
  const std::size_t nrow = model.row_names.size();
  out << "NAME          " << model.name << '\n';
  if (model.negated_max) out << "* objective negated: original sense is maximize\n";
  out << "ROWS\n" << line("N", "OBJ") << '\n';
  for (std::size_t r = 0; r < nrow; ++r) out << line(std::string(1, model.row_type[r]), model.row_names[r]) << '\n';

  // Column-major pass over the row storage.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(ncol);
  for (std::size_t r = 0; r < nrow; ++r) {
    const auto idx = model.rows.row_index(r);
    const auto val = model.rows.row_value(r);
    for (std::size_t e = 0; e < idx.size(); ++e) cols[static_cast<std::size_t>(idx[e])].emplace_back(r, val[e]);
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto set_marker = [&](bool want) {
    if (want == in_int) return;
    const std::string tag = want ? "'INTORG'" : "'INTEND'";
    out << line("", "MARKER" + std::to_string(marker++ % 100), "'MARKER'", "", tag) << '\n';
    in_int = want;
  };
  for (std::size_t c = 0; c < ncol; ++c) {
    set_marker(model.is_integer[c] != 0);
    std::vector<std::pair<std::string, double>> entries;
    if (model.cost[c] != 0.0) entries.emplace_back("OBJ", model.cost[c]);
    for (const auto& [r, v] : cols[c]) entries.emplace_back(model.row_names[r], v);
    if (entries.empty()) entries.emplace_back("OBJ", 0.0);
    for (std::size_t e = 0; e < entries.size(); e += 2) {
      if (e + 1 < entries.size()) {
        out << line("", model.col_names[c], entries[e].first, mps_number(entries[e].second), entries[e + 1].first,
                    mps_number(entries[e + 1].second))
            << '\n';
      } else {
        out << line("", model.col_names[c], entries[e].first, mps_number(entries[e].second)) << '\n';
      }
    }
  }
  set_marker(false);
  out << "RHS\n";
  std::vector<std::pair<std::string, double>> rhs;
  for (std::size_t r = 0; r < nrow; ++r) {
    if (model.rhs[r] != 0.0) rhs.emplace_back(model.row_names[r], model.rhs[r]);
  }
  for (std::size_t e = 0; e < rhs.size(); e += 2) {
    if (e + 1 < rhs.size()) {
      out << line("", "RHS", rhs[e].first, mps_number(rhs[e].second), rhs[e + 1].first, mps_number(rhs[e + 1].second))
          << '\n';
    } else {
      out << line("", "RHS", rhs[e].first, mps_number(rhs[e].second)) << '\n';
    }
  }
  out << "BOUNDS\n";
  for (std::size_t c = 0; c < ncol; ++c) {
    const double lo = model.lower[c], up = model.upper[c];
    const auto& nm = model.col_names[c];
    if (lo == -kInf && up == kInf) {
      out << line("FR", "BND", nm) << '\n';
      continue;
    }
    if (lo == -kInf) out << line("MI", "BND", nm) << '\n';
    else if (lo != 0.0) out << line("LO", "BND", nm, mps_number(lo)) << '\n';
    if (up != kInf) out << line("UP", "BND", nm, mps_number(up)) << '\n';
  }
  out << "ENDATA\n";
}

void write_mps(const MpsModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_mps(model, out);
  if (!out) throw ValidationError("write failed for " + path);
}

MpsModel parse_mps(std::istream& in, const std::string& source) {
  MpsModel m;
  std::unordered_map<std::string, std::size_t> row_of, col_of;
  std::vector<std::vector<std::pair<std::size_t, double>>> row_entries;
  std::string section, text, objective_row;
  bool in_int = false;
  std::size_t lineno = 0;
  std::vector<char> lower_set;
  while (std::getline(in, text)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (text[0] == '*') {
      if (text.find("objective negated") != std::string::npos) m.negated_max = true;
      continue;
    }
    const auto tok = tokens(text);
    if (text[0] != ' ') {
      section = tok[0];
      if (section == "NAME") m.name = tok.size() > 1 ? tok[1] : "";
      else if (section == "ENDATA") break;
      else if (section != "ROWS" && section != "COLUMNS" && section != "RHS" && section != "BOUNDS" && section != "RANGES") {
        throw ParseError(where + ": unknown section '" + section + "'");
      }
      if (section == "RANGES") throw ParseError(where + ": RANGES section not supported");
      continue;
    }
    if (section == "ROWS") {
      if (tok.size() != 2) throw ParseError(where + ": malformed ROWS line");
      if (tok[0] == "N") {
        if (objective_row.empty()) objective_row = tok[1];
        continue;
      }
      if (tok[0] != "L" && tok[0] != "E" && tok[0] != "G") throw ParseError(where + ": bad row type '" + tok[0] + "'");
      row_of[tok[1]] = m.row_names.size();
      m.row_names.push_back(tok[1]);
      m.row_type.push_back(tok[0][0]);
      m.rhs.push_back(0.0);
      row_entries.emplace_back();
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        in_int = tok[2] == "'INTORG'";
        continue;
      }
      if (tok.size() != 3 && tok.size() != 5) throw ParseError(where + ": malformed COLUMNS line");
      auto it = col_of.find(tok[0]);
      std::size_t c;
      if (it == col_of.end()) {
        c = m.col_names.size();
        col_of.emplace(tok[0], c);
        m.col_names.push_back(tok[0]);
        m.cost.push_back(0.0);
        m.lower.push_back(0.0);
        m.upper.push_back(kInf);
        m.is_integer.push_back(in_int ? 1 : 0);
      } else {
        c = it->second;
      }
      for (std::size_t f = 1; f + 1 < tok.size(); f += 2) {
        const double v = parse_number(tok[f + 1], where);
        if (tok[f] == objective_row) {
          m.cost[c] = v;
          continue;
        }
        const auto r = row_of.find(tok[f]);
        if (r == row_of.end()) throw ParseError(where + ": unknown row '" + tok[f] + "'");
        row_entries[r->second].emplace_back(c, v);
      }
    } else if (section == "RHS") {
      if (tok.size() != 3 && tok.size() != 5) throw ParseError(where + ": malformed RHS line");
      for (std::size_t f = 1; f + 1 < tok.size(); f += 2) {
        if (tok[f] == objective_row) continue;
        const auto r = row_of.find(tok[f]);
        if (r == row_of.end()) throw ParseError(where + ": unknown row '" + tok[f] + "'");
        m.rhs[r->second] = parse_number(tok[f + 1], where);
      }
    } else if (section == "BOUNDS") {
      if (tok.size() < 3) throw ParseError(where + ": malformed BOUNDS line");
      const auto it = col_of.find(tok[2]);
      if (it == col_of.end()) throw ParseError(where + ": unknown column '" + tok[2] + "'");
      const std::size_t c = it->second;
      const std::string& type = tok[0];
      const double v = tok.size() > 3 ? parse_number(tok[3], where) : 0.0;
      if (type == "UP") m.upper[c] = v;
      else if (type == "LO") m.lower[c] = v;
      else if (type == "FX") m.lower[c] = m.upper[c] = v;
      else if (type == "FR") m.lower[c] = -kInf, m.upper[c] = kInf;
      else if (type == "MI") m.lower[c] = -kInf;
      else if (type == "PL") m.upper[c] = kInf;
      else if (type == "BV") m.lower[c] = 0.0, m.upper[c] = 1.0, m.is_integer[c] = 1;
      else throw ParseError(where + ": unsupported bound type '" + type + "'");
    } else {
      throw ParseError(where + ": data line outside a section");
    }
  }
  m.rows = SparseRows(m.col_names.size());
  for (auto& entries : row_entries) {
    for (const auto& [c, v] : entries) m.rows.push(static_cast<std::int32_t>(c), v);
    m.rows.finish_row();
  }
  return m;
}

MpsModel read_mps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return parse_mps(in, path);
}

std::string mps_metadata_json(const LayoverProblem& problem, const std::string& name) {
  using nlohmann::ordered_json;
  const auto& L = problem.layout;
  ordered_json doc;
  doc["name"] = name;
  doc["formulation"] = to_string(problem.tag);
  doc["objective"] = "maximize; MPS costs are negated";
  doc["options"] = L.m;
  doc["states"] = L.n;
  ordered_json cols = ordered_json::array();
  for (std::size_t c = 0; c < problem.variables(); ++c) {
    ordered_json e;
    e["name"] = problem.column_name(c);
    if (c < L.m) e["block"] = "alpha", e["option"] = c;
    else if (c < 2 * L.m) e["block"] = "beta", e["option"] = c - L.m;
    else if (c < L.psi_offset()) e["block"] = "xi", e["state"] = c - 2 * L.m;
    else e["block"] = "psi", e["state_row"] = (c - L.psi_offset()) / L.n, e["state_col"] = (c - L.psi_offset()) % L.n;
    cols.push_back(std::move(e));
  }
  doc["columns"] = std::move(cols);
  ordered_json blocks = ordered_json::array();
  for (const auto& b : problem.blocks) {
    if (b.begin == b.end) continue;
    blocks.push_back({{"block", b.name},
                      {"first_row", problem.row_name(b.begin)},
                      {"last_row", problem.row_name(b.end - 1)},
                      {"rows", b.end - b.begin}});
  }
  doc["row_blocks"] = std::move(blocks);
  doc["bound_encoded_rows"] = problem.bound_rows;
  return doc.dump(1) + "\n";
}

}  // namespace layover
