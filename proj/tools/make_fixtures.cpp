// Regenerates the bundled synthetic fixtures under <dir> (default: fixtures/).
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

#include "restake/core/io.hpp"
#include "restake/pipeline.hpp"

namespace fs = std::filesystem;
using namespace restake;

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path(RESTAKE_SOURCE_DIR) / "fixtures";
  const auto panel = pipeline::synthetic_panel();
  write_file_atomic(dir / "synthetic_panel.csv", pipeline::to_csv(panel));

  pipeline::RawSeries apy{pipeline::raw::kStethApy, {}, "percent", ""};
  for (std::size_t i = 0; i < panel.rows(); ++i) apy.add(panel.dates[i], panel.at(pipeline::raw::kStethApy)[i]);
  write_file_atomic(dir / "steth_apy.csv", pipeline::to_csv(apy));

  nlohmann::json records = nlohmann::json::array();
  for (const auto& [d, v] : apy.points)
    records.push_back({{"timestamp", d.iso() + "T23:01:14.000Z"}, {"apy", v}, {"tvlUsd", 0}});
  nlohmann::json body{{"status", "success"}, {"data", records}};
  write_file_atomic(dir / "recorded" / "defillama_steth_apy.json", body.dump() + "\n");
  std::cout << "wrote fixtures to " << dir.string() << "\n";
  return 0;
}
