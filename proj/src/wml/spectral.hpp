#pragma once

// Bottom of the spectrum of the radial f-Laplacian on balls, annuli and
// exterior domains, and the closed-form bounds that bracket it.

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wml/expr.hpp"
#include "wml/manifold.hpp"
#include "wml/profile.hpp"

namespace wml {

enum class EigenMethod { PrueferShooting, FiniteDifference };
const char* to_string(EigenMethod m);

struct EigenResult {
  double lambda1 = 0.0;
  EigenMethod method = EigenMethod::PrueferShooting;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t mesh_nodes = 0;  // FD nodes, or ODE solves for shooting
  double residual = 0.0;       // |shooting - FD| when cross-checked, else final bracket width
  std::optional<double> cross_check;
  std::vector<std::pair<double, double>> history;  // (outer radius, lambda1) for exterior runs
  bool converged = true;
  std::string diagnostic;
};

struct SpectralOptions {
  double rel_tol = 1e-10;
  bool cross_check = true;
  std::size_t fd_nodes = 8000;
  OdeTolerance ode{1e-12, 1e-12};
};

/// Dirichlet lambda1 of -(a u')' = lambda a u on (r_lo, r_hi); r_lo = 0 is a ball.
EigenResult lambda1_interval(const ModelManifold& M, double r_lo, double r_hi, const SpectralOptions& opts = {});

/// Graded-mesh finite differences with Sturm bisection and Richardson
/// extrapolation over nodes and 2*nodes.
EigenResult lambda1_interval_fd(const ModelManifold& M, double r_lo, double r_hi, std::size_t nodes = 8000);

struct ExteriorSpectralOptions {
  double tol_abs = 1e-8;
  double tol_rel = 1e-9;
  int max_doublings = 40;
  SpectralOptions interval{1e-11, false};
};

/// lambda1(M minus closed B_R) through annuli (R, 2^k R). Throws
/// Error(NoConvergence) after max_doublings.
EigenResult lambda1_exterior(const ModelManifold& M, double R, const ExteriorSpectralOptions& opts = {});

struct EssSpecReport {
  std::vector<double> radii;
  std::vector<EigenResult> exterior;
  std::optional<double> bottom_estimate;  // empty when unbounded
  bool unbounded = false;
  bool monotone_ok = true;
  std::string diagnostic;
};

EssSpecReport ess_spectrum_bottom(const ModelManifold& M, const std::vector<double>& radii = {1.0, 2.0, 4.0, 8.0},
                                  const ExteriorSpectralOptions& opts = {});

enum class BoundKind {
  BartaVector,
  BartaFunction,
  Brooks,
  Cheng,
  QianI,
  QianII,
  QianIII,
  HalfDriftSquared,
  SolitonScalar,
  SemilinearInf,
  Prop40
};
const char* to_string(BoundKind k);

enum class BoundStatus { Ok, Inapplicable, UnboundedBelow, Unbounded, NonExistence };
const char* to_string(BoundStatus s);

struct BoundValue {
  BoundKind kind = BoundKind::BartaVector;
  BoundStatus status = BoundStatus::Ok;
  double value = 0.0;
  std::map<std::string, double> inputs;
  std::string note;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct BartaOptions {
  std::size_t samples = 10000;
  double far_radius = 1000.0;  // sampling cap when r_hi is infinite
};

/// lambda1 >= inf (w' + w drift - w^2) for the radial field w d/dr.
BoundValue barta_vector_bound(const ModelManifold& M, const std::function<Jet2(double)>& w, double r_lo,
                              double r_hi, const BartaOptions& opts = {});
BoundValue barta_vector_bound(const ModelManifold& M, const RadialFunction& w, double r_lo, double r_hi,
                              const BartaOptions& opts = {});
/// lambda1 >= inf (-Delta_f u / u) for positive u.
BoundValue barta_function_bound(const ModelManifold& M, const std::function<Jet2(double)>& u, double r_lo,
                                double r_hi, const BartaOptions& opts = {});
BoundValue barta_function_bound(const ModelManifold& M, const RadialFunction& u, double r_lo, double r_hi,
                                const BartaOptions& opts = {});

/// Dirichlet lambda1 of the geodesic ball of radius R in the dim-dimensional
/// spaceform of the given curvature. Throws DomainError past the diameter.
double spaceform_ball_lambda1(double curvature, int dim, double R);

/// lambda1 of the radius-R ball in H^{m+1}((alpha + beta)/m).
BoundValue cheng_upper_bound(double alpha, double beta, int m, double R);

/// (alpha, beta) for the ball of radius R about the pole: alpha = max(0, -min Ric_f),
/// beta = (max |f'|)^2.
std::pair<double, double> cheng_constants(const ModelManifold& M, double R);

BoundValue qian_drift_bound_I(double k, double C, int m, double r);
BoundValue qian_drift_bound_II(const RadialFunction& k1, const RadialFunction& k2, int m, double r);
BoundValue qian_drift_bound_III(double k, double C, double d_op, int m, double rho);

/// c^2/4 with c = inf over r > R of |drift|; Inapplicable on a sign change.
BoundValue half_drift_squared_bound(const ModelManifold& M, double R);

struct BrooksEssRecord {
  std::optional<double> ess_bottom;
  std::optional<double> brooks;
  bool skipped = false;
  bool consistent = true;
  std::string note;
};

BrooksEssRecord brooks_vs_ess(const ModelManifold& M, const EssSpecReport& ess, double tol = 1e-6);
BrooksEssRecord brooks_vs_ess(const ModelManifold& M);

BoundValue semilinear_inf_bound(double a, double b, double sigma, double ess_bottom);
BoundValue prop40_bound(double a, double b, double sigma, double c, double R);
/// c such that c (1 + R^2)/R^2 equals the Cheng value for the ball of radius R.
double prop40_constant(double alpha, double beta, int m, double R);

/// Lower bound for the bottom of the essential spectrum of a soliton:
/// (inf_{M minus B_R} S - m lambda) / m.
BoundValue soliton_scalar_bound(double inf_scalar, int m, double soliton_lambda);

enum class AprioriOutcome { Bounded, BlowUp, ExitsPositivity, Undetermined };
const char* to_string(AprioriOutcome o);

struct AprioriSample {
  double u0 = 0.0;
  AprioriOutcome outcome = AprioriOutcome::Undetermined;
  double sup = 0.0;
};

struct AprioriReport {
  double bound = 0.0;  // H^{1/(sigma-1)}
  std::vector<AprioriSample> samples;
  bool holds = true;
};

/// Radial solutions of Delta_f u = a u + b u^sigma from u(0) = u0, u'(0) = 0,
/// integrated to r_max; every bounded one must stay below (a_-/b)^{1/(sigma-1)}.
AprioriReport apriori_check(const ModelManifold& M, double a, double b, double sigma,
                            const std::vector<double>& u0s, double r_max = 10.0);

}  // namespace wml
