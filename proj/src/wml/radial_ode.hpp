#pragma once

// ODE certificates on models: the alpha function, minimal exterior solutions,
// the comparison Cauchy problem, the Riccati crossing, semilinear exterior
// problems and the truncated radial heat-mass evolution.

#include <optional>
#include <string>
#include <vector>

#include "wml/manifold.hpp"
#include "wml/profile.hpp"

namespace wml {

/// alpha(r) = integral_0^r (integral_0^t a)/a(t) dt; Delta_f alpha = 1.
double alpha_function(const ModelManifold& M, double r);
/// alpha(inf) when finite; +inf otherwise (evaluated through the classifier).
double alpha_limit(const ModelManifold& M);

struct ExteriorOptions {
  double r_eval_max = 20.0;
  int max_doublings = 40;
  double tol = 1e-8;
  int grid_points = 401;
  OdeTolerance ode{1e-12, 1e-10};
};

/// Minimal positive solution of Delta_f h = lambda h outside B_{R0}, h(R0) = 1,
/// by exhaustion over annuli (R0, R_k) with h(R_k) = 0 and R_k doubling.
RadialProfile minimal_exterior_solution(const ModelManifold& M, double lambda, double R0,
                                        const ExteriorOptions& opts = {});

/// Two-point solution on (R0, R_outer) with h(R0) = 1, h(R_outer) = 0, sampled on [R0, r_eval_max].
RadialProfile dirichlet_annulus_solution(const ModelManifold& M, double lambda, double R0, double R_outer,
                                         double r_eval_max, const ExteriorOptions& opts = {});

struct ComparisonResult {
  RadialProfile g;              // g and g' while representable
  std::vector<double> grid;     // full range
  std::vector<double> log_g;
  std::vector<double> psi;      // g'/g
  std::optional<double> switch_radius;  // where the Riccati form took over

  double psi_at(double r) const;
};

/// g'' = ((k1^2 + k2^2)/m) g, g(0) = 0, g'(0) = 1 on [0, r_max].
ComparisonResult comparison_g(const RadialFunction& k1, const RadialFunction& k2, int m, double r_max = 10.0,
                              const OdeTolerance& tol = {1e-13, 1e-12});

struct CrossingSample {
  double r, psi, k;
};

struct CrossingReport {
  bool crossed = false;
  double r_o = 0.0;
  bool psi_tail_ok = false;
  std::vector<CrossingSample> samples;
  double psi_start_error = 0.0;  // |psi(1e-4) - 1/1e-4|
  /// inf over sampled r >= r_o of k(r) (integral_0^r g^m)/g(r)^m.
  double liminf_estimate = 0.0;
  std::vector<double> perturbed_r_o;  // initial psi(eps) = 1/eps -/+ 1
  double sensitivity = 0.0;
  std::string diagnostic;
};

CrossingReport riccati_crossing(const RadialFunction& k, int m, double r_max = 50.0);

enum class SupportKind { DecaysToZero, CompactSupport, BoundedAway };
const char* to_string(SupportKind k);

/// Lambda(u) = a u + b u^p, or a user expression in the variable `r` read as u.
struct SemilinearRhs {
  double a = 0.0;
  double b = 0.0;
  double p = 1.0;
  std::optional<RadialFunction> custom;

  double operator()(double u) const;
  std::string describe() const;
};

struct ShotRecord {
  double slope;
  std::string outcome;  // "crossed", "turned", "reached"
  double radius;
};

struct SemilinearOptions {
  double r_max_offset = 40.0;
  int max_bisections = 200;
  OdeTolerance ode{1e-12, 1e-10};
};

struct SemilinearResult {
  RadialProfile profile;
  SupportKind kind = SupportKind::DecaysToZero;
  std::optional<double> r_dead;
  std::vector<ShotRecord> trace;
  std::string diagnostic;
};

/// u'' + drift u' = Lambda(u) outward from (R0, u0), shooting on u'(R0).
SemilinearResult semilinear_exterior(const ModelManifold& M, const SemilinearRhs& rhs, double R0, double u0,
                                     const SemilinearOptions& opts = {});

struct MassCurve {
  std::vector<double> times;
  std::vector<double> mass;
  double truncation_radius = 0.0;
  double leakage_estimate = 0.0;
  double conservation_error = 0.0;  // |mass + outflow - 1| at the final time
};

MassCurve heat_mass(const ModelManifold& M, double r_init, double T, double R_trunc, int n_space = 4000,
                    int n_time = 2000);

struct MassStudy {
  std::vector<MassCurve> curves;  // one per truncation radius
  double defect = 0.0;            // 1 - mass(T) at the last radius
  double truncation_sensitivity = 0.0;  // |defect change| over the last doubling
  bool stabilized = false;
};

/// Doubles R_trunc from R_start until the defect changes by less than `tol`.
MassStudy heat_mass_doubling(const ModelManifold& M, double r_init, double T, double R_start, int max_doublings = 4,
                             double tol = 5e-3, int n_space = 4000, int n_time = 2000);

}  // namespace wml
