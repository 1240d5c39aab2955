#pragma once

// Fixed-format MPS export/import. MPS minimizes, so a maximization objective
// is written negated; a comment line records the flip.

#include <string>
#include <vector>

#include "layover/formulation.hpp"
#include "layover/sparse.hpp"

namespace layover {

/// Solver-neutral view of an MPS file: minimize cost^T z.
struct MpsModel {
  std::string name;
  bool negated_max = false;
  std::vector<std::string> row_names;
  std::vector<char> row_type;  // 'L', 'E' or 'G'
  std::vector<double> rhs;
  std::vector<std::string> col_names;
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<char> is_integer;
  SparseRows rows;

  friend bool operator==(const MpsModel&, const MpsModel&) = default;
};

MpsModel to_mps_model(const LayoverProblem& problem, const std::string& name);

void write_mps(const MpsModel& model, std::ostream& out);
void write_mps(const MpsModel& model, const std::string& path);
MpsModel parse_mps(std::istream& in, const std::string& source = "<mps>");
MpsModel read_mps(const std::string& path);

/// Name map for an exported problem: every MPS column and row with its block and indices.
std::string mps_metadata_json(const LayoverProblem& problem, const std::string& name);

/// Shortest decimal text of `v` that fits a 12-character MPS field.
std::string mps_number(double v);

}  // namespace layover
