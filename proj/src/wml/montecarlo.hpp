#pragma once

// Euler-Maruyama simulation of the radial diffusion with generator Delta_f:
// dX = drift(X) dt + sqrt(2) dW, reflected near the pole.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wml/manifold.hpp"

namespace wml {

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

struct SimConfig {
  std::size_t n_paths = 10000;
  double t_max = 1.0;
  double dt_base = 1e-3;
  double r_absorb_outer = 50.0;
  double r_reflect_inner = 1e-4;
  std::uint64_t seed = 1;
  int threads = 0;               // 0: WML_THREADS or hardware concurrency
  std::size_t trace_paths = 0;   // per-path traces for the first n paths
  bool dt_check = true;          // rerun 10% of paths at half step
};

/// Throws ValidationError unless n_paths >= 100, 0 < dt_base <= 1e-3 and the radii are ordered.
void validate(const SimConfig& cfg);

struct HittingEstimate {
  double r_start = 0.0;
  double lambda = 0.0;
  double estimate = 0.0;
  double ci95 = 0.0;
  double survived_fraction = 0.0;  // neither hit nor left by t_max
  double outward_fraction = 0.0;   // left through the outer radius
  double remainder_bound = 0.0;    // survived_fraction * exp(-lambda t_max)
};

struct TracePoint {
  std::size_t path;
  double t;
  double r;
};

struct SimReport {
  double explosion_fraction = 0.0;
  double ci95_halfwidth = 0.0;
  std::vector<HittingEstimate> hitting_estimates;
  std::size_t n_effective = 0;
  std::size_t underflow_paths = 0;
  std::uint64_t total_steps = 0;
  // Half-step rerun on every tenth path.
  std::size_t dt_check_paths = 0;
  double dt_check_full = 0.0;
  double dt_check_half = 0.0;
  bool dt_stable = true;
  int threads_used = 1;
  std::vector<TracePoint> trace;
  std::string diagnostic;
};

/// Fraction of paths from r0 absorbed at r_absorb_outer before t_max.
SimReport simulate_explosion(const ModelManifold& M, double r0, const SimConfig& cfg);

/// E_{r0}[exp(-lambda tau)] with tau the hitting time of the sphere of radius R0.
SimReport hitting_laplace(const ModelManifold& M, double r0, double R0, double lambda, const SimConfig& cfg);
SimReport hitting_laplace(const ModelManifold& M, const std::vector<double>& r0s, double R0, double lambda,
                          const SimConfig& cfg);

void write_trace_csv(const SimReport& rep, std::ostream& out);

/// Worker count from WML_THREADS, else hardware concurrency (at least 1).
int default_thread_count();

}  // namespace wml
