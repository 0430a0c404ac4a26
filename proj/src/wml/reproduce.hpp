#pragma once

// Regeneration of the worked example tables with a pass/fail flag per cell.

#include <string>
#include <vector>

#include "wml/report.hpp"

namespace wml {

struct ReproRow {
  std::string label;
  std::string expected;
  std::string observed;
  bool pass = false;
  Json evidence = Json::object();
};

struct Reproduction {
  std::string id;
  std::string claim;
  std::vector<ReproRow> rows;

  bool all_pass() const;
  Json to_json() const;
};

/// feller-alpha-table, stoch-incomplete-model, discrete-spectrum-alpha, soliton-audit.
std::vector<std::string> reproduction_ids();

/// Throws Error(UnknownIdentifier) for an id outside reproduction_ids().
Reproduction reproduce(const std::string& id);

}  // namespace wml
