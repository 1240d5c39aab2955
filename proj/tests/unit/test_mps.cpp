#include <sstream>

#include "catch_amalgamated.hpp"
#include "layover/errors.hpp"
#include "layover/mps.hpp"
#include "layover/synthetic.hpp"
#include "json.hpp"

using namespace layover;

namespace {

std::string text_of(const MpsModel& m) {
  std::ostringstream os;
  write_mps(m, os);
  return os.str();
}

}  // namespace

TEST_CASE("export, parse and export again is byte-identical") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_small_instance(derive_seed(8, seed), 8, 3);
    for (auto f : {Formulation::LP, Formulation::LP_STAR, Formulation::LP_COMBINED, Formulation::MILP}) {
      const auto model = to_mps_model(assemble_instance(f, inst), "T");
      const auto first = text_of(model);
      std::istringstream in(first);
      const auto parsed = parse_mps(in);
      CHECK(text_of(parsed) == first);
      CHECK(parsed.col_names == model.col_names);
      CHECK(parsed.rows.nonzeros() == model.rows.nonzeros());
    }
  }
}

TEST_CASE("integer markers surround exactly the Psi columns") {
  const auto inst = random_small_instance(4, 6, 3);
  const auto p = assemble_instance(Formulation::MILP, inst);
  std::istringstream in(text_of(to_mps_model(p, "M")));
  const auto parsed = parse_mps(in);
  REQUIRE(parsed.is_integer.size() == p.variables());
  for (std::size_t c = 0; c < p.variables(); ++c) CHECK(static_cast<bool>(parsed.is_integer[c]) == (c >= p.layout.psi_offset()));
  std::istringstream lp_in(text_of(to_mps_model(assemble_instance(Formulation::LP, inst), "L")));
  CHECK(text_of(parse_mps(lp_in)).find("MARKER") == std::string::npos);
}

TEST_CASE("objective is written negated for minimization") {
  const auto inst = random_small_instance(6, 5, 2);
  const auto p = assemble_instance(Formulation::LP, inst);
  const auto m = to_mps_model(p, "N");
  CHECK(m.negated_max);
  for (std::size_t c = 0; c < p.variables(); ++c) CHECK(m.cost[c] == -p.objective[c]);
  CHECK(text_of(m).find("* objective negated") != std::string::npos);
}

TEST_CASE("numbers fit the twelve-character field") {
  for (double v : {0.1, 1.0 / 3.0, -4523.123456789, 1e-300, 12345678901234.0}) {
    const auto s = mps_number(v);
    CHECK(s.size() <= 12);
    CHECK(std::abs(std::stod(s) - v) <= 1e-6 * std::abs(v));
  }
  CHECK(std::abs(std::stod(mps_number(-4523.123456789)) + 4523.123456789) < 1e-6);
  CHECK(mps_number(0.25) == "0.25");
  CHECK(mps_number(4520.02) == "4520.02");
}

TEST_CASE("malformed files raise parse errors") {
  std::istringstream ranges("NAME X\nROWS\n N OBJ\n L R0\nCOLUMNS\n    A0        R0        1\nRHS\nRANGES\n    RNG       R0        1\nENDATA\n");
  CHECK_THROWS_AS(parse_mps(ranges), ParseError);
  std::istringstream bad("NAME X\nROWS\n N OBJ\n L R0\nCOLUMNS\n    A0        R0        x1\nENDATA\n");
  CHECK_THROWS_AS(parse_mps(bad), ParseError);
}

TEST_CASE("metadata maps every column and row") {
  const auto inst = random_small_instance(12, 5, 2);
  const auto p = assemble_instance(Formulation::LP, inst);
  const auto j = nlohmann::json::parse(mps_metadata_json(p, "meta"));
  CHECK(j.at("columns").size() == p.variables());
  std::size_t rows = 0;
  for (const auto& b : j.at("row_blocks")) rows += b.at("rows").get<std::size_t>();
  CHECK(rows == p.constraint_rows());
  CHECK(mps_metadata_json(p, "meta") == mps_metadata_json(assemble_instance(Formulation::LP, inst), "meta"));
}
