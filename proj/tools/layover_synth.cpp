#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "layover/csv.hpp"
#include "layover/market_data.hpp"
#include "layover/synthetic.hpp"

// Writes a seeded synthetic history in the loader schemas: quotes.csv,
// observables.csv and realized.csv.
int main(int argc, char** argv) {
  CLI::App app{"Synthetic option history"};
  std::string out = "synthetic";
  std::uint64_t seed = 1;
  std::size_t months = 24;
  double strike_step = 25.0;
  app.add_option("--output", out)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--months", months)->capture_default_str();
  app.add_option("--strike-step", strike_step)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto history = layover::synthetic_history(seed, months, strike_step);
    std::vector<layover::MarketSnapshot> snaps;
    for (const auto& m : history) snaps.push_back(m.snapshot);
    std::filesystem::create_directories(out);
    const std::filesystem::path dir(out);
    layover::write_quotes_csv(snaps, (dir / "quotes.csv").string());
    layover::write_observables_csv(snaps, (dir / "observables.csv").string());
    std::ofstream realized(dir / "realized.csv");
    realized << "trade_date,realized_index\n";
    for (const auto& m : history) {
      realized << m.snapshot.trade_date.iso() << ',' << layover::csv::format17(m.realized_index) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
