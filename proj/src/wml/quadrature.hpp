#pragma once

// Adaptive Gauss-Kronrod quadrature carried out on log-integrands, so that
// integrals of densities like exp(r^3) or exp(-r^3) over long ranges neither
// overflow nor underflow. All values here are natural logarithms.

#include <functional>
#include <limits>
#include <vector>
#include <span>

#include "wml/expr.hpp"

namespace wml {

/// Returns log of the integrand at a point; -inf encodes a zero.
using LogIntegrand = std::function<double(double)>;

/// (log a, (log a)', (log a)'') of a positive density.
using LogDensity = std::function<Jet2(double)>;

struct LogQuadResult {
  double log_value = -std::numeric_limits<double>::infinity();
  double log_error = -std::numeric_limits<double>::infinity();
  int intervals = 0;
  bool converged = true;
};

double log_add(double a, double b);

/// log of integral of exp(log_f) over [a, b] (a < b) to relative tolerance.
LogQuadResult log_integrate(const LogIntegrand& log_f, double a, double b, double rel_tol = 1e-11,
                            int max_intervals = 2000);

/// Same, starting from an initial partition (sorted breakpoints, size >= 2).
LogQuadResult log_integrate(const LogIntegrand& log_f, std::span<const double> breakpoints,
                            double rel_tol = 1e-11, int max_intervals = 4000);

/// log of (integral_lower^t a(s) ds) / a(t). Uses the two-term Laplace
/// expansion once the density varies on a scale far below t, where
/// differences of log a at nearby points lose all precision.
double log_head_ratio(const LogDensity& log_density, double t, double lower = 0.0);

/// log of (integral_t^inf a(s) ds) / a(t); +inf when the tail does not converge.
double log_tail_ratio(const LogDensity& log_density, double t);

/// Running integral of a density from a fixed origin, memoised at dyadic
/// checkpoints. Not thread-safe; create one per computation.
class CumulativeLogIntegral {
 public:
  CumulativeLogIntegral(LogIntegrand log_f, double origin, double rel_tol = 1e-11);

  /// log of integral_origin^x.
  double operator()(double x);

 private:
  LogIntegrand log_f_;
  double origin_;
  double rel_tol_;
  std::vector<double> checkpoints_;
};

}  // namespace wml
