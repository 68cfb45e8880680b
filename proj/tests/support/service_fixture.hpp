#pragma once

#include <filesystem>

#include "restake/core/io.hpp"
#include "restake/interface/service.hpp"

namespace support {

inline restake::interface::ServiceConfig service_config() {
  const std::filesystem::path root = RESTAKE_SOURCE_DIR;
  restake::interface::ServiceConfig c;
  c.graph = restake::flow::load_graph(restake::flow::BundledFixture{"fig5_2025-10-04"});
  c.scenario_defaults = restake::stress::scenario_from_json(
      nlohmann::json::parse(restake::read_file(root / "scenarios" / "paper_linea_2025-10-04.json")));
  return c;
}

inline std::string panel_body(nlohmann::json extra = nlohmann::json::object()) {
  extra["panel_csv"] = restake::read_file(std::filesystem::path(RESTAKE_SOURCE_DIR) / "fixtures" / "synthetic_panel.csv");
  return extra.dump();
}

}  // namespace support
