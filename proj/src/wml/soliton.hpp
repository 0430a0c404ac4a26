#pragma once

// Consistency audit of the rotationally symmetric soliton presets.

#include <optional>
#include <string>
#include <vector>

#include "wml/integrability.hpp"
#include "wml/manifold.hpp"

namespace wml {

struct SolitonAudit {
  std::string name;
  double soliton_constant = 0.0;
  double basic_eq_residual = 0.0;   // spread of S + |f'|^2 - 2 lambda f over the grid
  double scalar_eq_residual = 0.0;  // max |Delta_f S / 2 - lambda S + |Ric|^2|
  bool scalar_lower_bound_ok = true;
  double gradient_b = 0.0;          // smallest b with |f'| <= b + |lambda| r on the grid
  double gradient_slope = 0.0;      // least-squares slope of |f'| on the outer decade
  bool gradient_ok = true;
  bool volume_finite = false;
  bool volume_ok = true;            // finite whenever lambda > 0
  Answer sc = Answer::Unknown;
  Answer feller = Answer::Unknown;
  std::optional<double> ess_bottom;  // empty when the essential spectrum is empty
  double scal2_lower = 0.0;          // (inf S - m lambda)/m
  bool scal2_ok = true;
  double qian_k = 0.0;
  double qian_C = 0.0;
  bool qian3_ok = true;
  bool all_pass = false;
  std::vector<std::string> failures;
};

SolitonAudit audit_soliton(const SolitonPreset& p, const std::string& name = {});

}  // namespace wml
