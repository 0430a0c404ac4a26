#pragma once

// Weighted rotationally symmetric model manifolds: R^m with metric
// dr^2 + g(r)^2 dtheta^2 and measure e^{-f} dvol, plus the preset catalog.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wml/expr.hpp"

namespace wml {

/// Parsed `key = value` document (manifold spec files).
using KeyValueDoc = std::map<std::string, std::string>;

KeyValueDoc parse_key_values(std::string_view text);

/// Principal values of Ric_f at radius r: the radial direction and the
/// (m-1)-fold tangential direction.
struct RicciF {
  double radial = 0.0;
  double tangential = 0.0;
  double min() const { return radial < tangential ? radial : tangential; }
};

class ModelManifold {
 public:
  /// Validates the model structure; throws ValidationError.
  ModelManifold(int dimension, RadialFunction warp, RadialFunction weight, std::string label = {});

  int dimension() const { return dimension_; }
  const RadialFunction& warp() const { return warp_; }
  const RadialFunction& weight() const { return weight_; }
  const std::string& label() const { return label_; }

  /// Jet of log a(r) where a = g^{n-1} e^{-f}; d1 is the drift, d2 its
  /// derivative. `exponent` defaults to the dimension (n = m).
  Jet2 log_density_jet(double r, std::optional<double> exponent = std::nullopt) const;

  /// Delta_f r = (m-1) g'/g - f'.
  double drift(double r) const { return log_density_jet(r).d1; }

  double log_area_density(double r) const { return log_density_jet(r).value; }
  /// g^{m-1} e^{-f}; throws Error(Overflow) outside the double range.
  double area_density(double r) const;

  /// Area of the unit (m-1)-sphere.
  double sphere_area() const;

  double log_weighted_ball_volume(double radius) const;
  /// omega_{m-1} * integral_0^R a(r) dr, adaptive to relative 1e-9.
  double weighted_ball_volume(double radius) const;

  RicciF ricci_f(double r) const;

  /// Same manifold with f replaced by f + shift.
  ModelManifold with_weight_shift(double shift) const;

 private:
  int dimension_;
  RadialFunction warp_;
  RadialFunction weight_;
  std::string label_;
};

/// Builds a manifold from `dimension`, `g`, optional `f` and `label` keys.
ModelManifold load_manifold(const KeyValueDoc& doc);
ModelManifold load_manifold_text(std::string_view text);
ModelManifold load_manifold_file(const std::string& path);

struct SolitonPreset {
  ModelManifold base;
  double soliton_constant;            // lambda in Ric_f = lambda <,>
  RadialFunction scalar_curvature;    // S
  RadialFunction ricci_norm_squared;  // |Ric|^2, supplied analytically
};

/// euclidean-m, hyperbolic-m, exp-alpha-m-<alpha>, gaussian-shrinker-m-<lambda>,
/// exp-growth-m, steady-flat-m. Throws Error(UnknownPreset).
ModelManifold preset(std::string_view name);
SolitonPreset soliton_preset(std::string_view name);
bool is_soliton_preset(std::string_view name);

/// Names used by catalog-wide checks.
std::vector<std::string> preset_catalog();

}  // namespace wml
