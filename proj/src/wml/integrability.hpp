#pragma once

// Convergence tests for the improper integrals that decide stochastic
// completeness and the Feller property of a model, plus volume growth rates.

#include <optional>
#include <string>
#include <vector>

#include "wml/manifold.hpp"
#include "wml/quadrature.hpp"

namespace wml {

enum class IntegralState { Convergent, Divergent, Inconclusive };
enum class TailKind { AtInfinity, AtZeroPlus };
enum class Answer { Yes, No, Unknown };
enum class Property { StochasticCompleteness, Feller };

const char* to_string(IntegralState s);
const char* to_string(TailKind t);
const char* to_string(Answer a);
const char* to_string(Property p);

struct PartialValue {
  double radius;
  double log_integral;  // log I(R); I itself may exceed the double range
};

struct IntegrabilityVerdict {
  std::string name;
  IntegralState state = IntegralState::Inconclusive;
  std::vector<PartialValue> partial_values;
  std::vector<double> increment_ratios;
  std::optional<double> tail_estimate;
  /// Limit of the partial integrals when Convergent.
  std::optional<double> limit;
  /// Convergence was only established by extrapolating a stable ratio at the octave cap.
  bool extrapolated = false;
  std::string diagnostic;
};

struct ClassifyOptions {
  double origin = 1.0;  // R0; for AtZeroPlus the fixed upper end
  int max_octaves = 60;
  double rel_tol = 1e-10;
};

/// Tests the integral of exp(L) over [origin, inf) or (0, origin], where the
/// callback returns L and L' (d2 unused). L' places breakpoints at steep ends.
IntegrabilityVerdict classify_integral(const LogDensity& log_integrand, TailKind tail,
                                       const ClassifyOptions& opts = {}, std::string name = {});

/// Convenience form for a plain positive integrand.
IntegrabilityVerdict classify_integral_plain(const std::function<double(double)>& integrand,
                                             double origin, TailKind tail, std::string name = {});

struct ClassificationReport {
  Property property = Property::StochasticCompleteness;
  Answer verdict = Answer::Unknown;
  std::vector<IntegrabilityVerdict> evidence;
  std::string rule_fired;
  std::optional<double> u_star;  // finite value of the completeness criterion integral
  std::optional<double> exponent;  // comparison exponent n when it differs from m
  std::string criterion = "weighted-density criterion";
  std::string diagnostic;
};

struct CriterionOptions {
  /// Comparison exponent n replacing m in g^{n-1}; applied verbatim.
  std::optional<double> exponent;
};

ClassificationReport stochastic_completeness(const ModelManifold& M, const CriterionOptions& opts = {});
ClassificationReport feller(const ModelManifold& M, const CriterionOptions& opts = {});

/// R / log vol_f(B_R) on [R0, inf); Divergent means completeness is implied.
IntegrabilityVerdict volume_growth_sc_test(const ModelManifold& M);

struct BrooksResult {
  bool finite_volume = false;
  bool unbounded = false;
  double value = 0.0;  // limsup estimate when bounded
  std::vector<std::pair<double, double>> samples;  // (R, quantity / R)
  std::string diagnostic;
};

/// limsup log vol_f(B_R)/R, or limsup -log(vol_f(M) - vol_f(B_R))/R for finite volume.
BrooksResult brooks_bound(const ModelManifold& M);

/// log of the integral from 0 to t of a(s) ds (no angular factor), any t > 0.
double log_head_integral(const ModelManifold& M, double t, std::optional<double> exponent = std::nullopt);

}  // namespace wml
