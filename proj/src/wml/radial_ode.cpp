#include "wml/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wml/error.hpp"
#include "wml/integrability.hpp"
#include "wml/quadrature.hpp"

namespace wml {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
  g.back() = b;
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// alpha function
// ---------------------------------------------------------------------------

double alpha_function(const ModelManifold& M, double r) {
  if (!(r > 0.0)) return 0.0;
  auto density = [&](double s) { return M.log_density_jet(s); };
  auto log_f = [&](double t) { return log_head_ratio(density, t); };
  std::vector<double> bp = {0.0};
  for (int j = -40; j < 0; ++j) bp.push_back(std::ldexp(r, j));
  bp.push_back(r);
  const LogQuadResult q = log_integrate(log_f, bp, 1e-10, 20000);
  if (!q.converged) throw Error(ErrorKind::Quadrature, "alpha function not resolved at r = " + format_number(r));
  return std::exp(q.log_value);
}

double alpha_limit(const ModelManifold& M) {
  const auto rep = stochastic_completeness(M);
  if (rep.u_star) return *rep.u_star;
  return kInf;
}

// ---------------------------------------------------------------------------
// Minimal exterior solution
// ---------------------------------------------------------------------------

RadialProfile dirichlet_annulus_solution(const ModelManifold& M, double lambda, double R0, double R_outer,
                                         double r_eval_max, const ExteriorOptions& opts) {
  if (!(R_outer > r_eval_max && r_eval_max > R0))
    throw DomainError("annulus needs R0 < r_eval_max < R_outer");
  // z = h/h' solves z' = 1 + drift z - lambda z^2 with z(R_outer) = 0; it is
  // integrated inward, the stable direction. L = log h follows from L' = 1/z.
  OdeRhs<2> rhs = [&](const OdeState<2>& y, OdeState<2>& dy, double r) {
    const double z = y[0];
    dy[0] = 1.0 + M.drift(r) * z - lambda * z * z;
    dy[1] = 1.0 / z;
  };
  const double d_out = M.drift(R_outer);
  const double delta = std::min(1e-7 * R_outer, 1e-4 / (1.0 + std::abs(d_out) + std::sqrt(lambda)));
  OdeState<2> y0 = {-delta + 0.5 * d_out * delta * delta, std::log(delta)};
  const auto far = integrate_ode<2>(rhs, y0, R_outer - delta, r_eval_max, opts.ode);
  const double max_step = (r_eval_max - R0) / (4.0 * (opts.grid_points - 1));
  const auto near = integrate_ode<2>(rhs, far.y.back(), r_eval_max, R0, opts.ode, {}, max_step);
  const double L0 = near.y.back()[1];
  RadialProfile p;
  for (std::size_t i = near.r.size(); i-- > 0;) {
    const double h = std::exp(near.y[i][1] - L0);
    p.grid.push_back(near.r[i]);
    p.values.push_back(h);
    p.derivative_values.push_back(h / near.y[i][0]);
  }
  p.grid.front() = R0;
  p.values.front() = 1.0;
  p.bc_meta = "h(" + format_number(R0) + ") = 1, h(" + format_number(R_outer) + ") = 0";
  return p;
}

RadialProfile minimal_exterior_solution(const ModelManifold& M, double lambda, double R0,
                                        const ExteriorOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(R0 > 0.0)) throw DomainError("R0 must be positive");
  const double r_eval = std::max(opts.r_eval_max, R0 * (1.0 + 1e-3) + 1e-3);
  const auto samples = uniform_grid(R0, r_eval, opts.grid_points);
  std::vector<double> prev;
  std::vector<double> history;
  double R_k = 2.0 * r_eval;
  for (int k = 0; k <= opts.max_doublings; ++k, R_k *= 2.0) {
    RadialProfile p = dirichlet_annulus_solution(M, lambda, R0, R_k, r_eval, opts);
    std::vector<double> cur(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) cur[i] = p(samples[i]);
    if (!prev.empty()) {
      double change = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i) change = std::max(change, std::abs(cur[i] - prev[i]));
      history.push_back(change);
      if (change < opts.tol) {
        p.history = history;
        p.converged = true;
        p.monotone_decreasing = p.check_monotone();
        p.bc_meta = "h(" + format_number(R0) + ") = 1; exhaustion with outer value 0, final R = " +
                    format_number(R_k);
        return p;
      }
    }
    prev = std::move(cur);
  }
  throw Error(ErrorKind::NoConvergence,
              "minimal exterior solution still moving after " + std::to_string(opts.max_doublings) +
                  " doublings (last change " + format_number(history.empty() ? kInf : history.back()) + ")");
}

// ---------------------------------------------------------------------------
// Comparison Cauchy problem
// ---------------------------------------------------------------------------

double ComparisonResult::psi_at(double r) const {
  if (r <= 0.0 || r > grid.back()) throw DomainError("psi requested outside the comparison range");
  auto it = std::lower_bound(grid.begin(), grid.end(), r);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) return 1.0 / r;
  if (grid[i] == r) return psi[i];
  // psi ~ 1/r near the pole; interpolate r*psi there.
  const double t = (r - grid[i - 1]) / (grid[i] - grid[i - 1]);
  const double a = grid[i - 1] * psi[i - 1], b = grid[i] * psi[i];
  return ((1 - t) * a + t * b) / r;
}

ComparisonResult comparison_g(const RadialFunction& k1, const RadialFunction& k2, int m, double r_max,
                              const OdeTolerance& tol) {
  if (m < 1) throw DomainError("comparison dimension must be positive");
  auto K = [&](double r) {
    const double a = k1(r), b = k2(r);
    return (a * a + b * b) / m;
  };
  ComparisonResult out;
  const double max_step = r_max / 4000.0;
  OdeRhs<2> lin = [&](const OdeState<2>& y, OdeState<2>& dy, double r) {
    dy[0] = y[1];
    dy[1] = K(r) * y[0];
  };
  auto overflow = [](double, const OdeState<2>& y) { return y[0] - 1e100; };
  const auto run = integrate_ode<2>(lin, {0.0, 1.0}, 0.0, r_max, tol, overflow, max_step);
  for (std::size_t i = 0; i < run.r.size(); ++i) {
    out.g.grid.push_back(run.r[i]);
    out.g.values.push_back(run.y[i][0]);
    out.g.derivative_values.push_back(run.y[i][1]);
    out.grid.push_back(run.r[i]);
    out.log_g.push_back(run.r[i] > 0 ? std::log(run.y[i][0]) : -kInf);
    out.psi.push_back(run.r[i] > 0 ? run.y[i][1] / run.y[i][0] : kInf);
  }
  out.g.bc_meta = "g(0) = 0, g'(0) = 1";
  if (run.event_fired) {
    out.switch_radius = run.r_event;
    OdeRhs<2> ric = [&](const OdeState<2>& y, OdeState<2>& dy, double r) {
      dy[0] = y[1];
      dy[1] = K(r) - y[1] * y[1];
    };
    const OdeState<2> y0 = {std::log(run.y_event[0]), run.y_event[1] / run.y_event[0]};
    const auto tail = integrate_ode<2>(ric, y0, run.r_event, r_max, tol, {}, max_step);
    for (std::size_t i = 1; i < tail.r.size(); ++i) {
      out.grid.push_back(tail.r[i]);
      out.log_g.push_back(tail.y[i][0]);
      out.psi.push_back(tail.y[i][1]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Riccati crossing
// ---------------------------------------------------------------------------

namespace {

struct RiccatiRun {
  bool crossed = false;
  double r_o = 0.0;
  OdeState<2> at{};
  double psi_start = 0.0;
};

// z = 1/psi, z' = 1 - k^2 z^2; H = (integral_0^r g^m)/g^m with H' = 1 - m H / z.
OdeRhs<2> riccati_rhs(const RadialFunction& k, int m) {
  return [&k, m](const OdeState<2>& y, OdeState<2>& dy, double r) {
    const double kv = k(r);
    dy[0] = 1.0 - kv * kv * y[0] * y[0];
    dy[1] = 1.0 - m * y[1] / y[0];
  };
}

RiccatiRun riccati_run(const RadialFunction& k, int m, double r_max, double psi_shift) {
  constexpr double eps = 1e-6;
  const OdeTolerance tol{1e-14, 1e-12};
  const auto rhs = riccati_rhs(k, m);
  const OdeState<2> y0 = {1.0 / (1.0 / eps + psi_shift), eps / (m + 1.0)};
  RiccatiRun out;
  const auto first = integrate_ode<2>(rhs, y0, eps, 1e-4, tol);
  out.psi_start = 1.0 / first.y.back()[0];
  auto event = [&](double r, const OdeState<2>& y) { return y[0] * k(r) - 1.0 - 1e-10; };
  const auto run = integrate_ode<2>(rhs, first.y.back(), 1e-4, r_max, tol, event);
  if (run.event_fired) {
    out.crossed = true;
    out.r_o = run.r_event;
    out.at = run.y_event;
  }
  return out;
}

}  // namespace

CrossingReport riccati_crossing(const RadialFunction& k, int m, double r_max) {
  CrossingReport rep;
  const RiccatiRun base = riccati_run(k, m, r_max, 0.0);
  rep.psi_start_error = std::abs(base.psi_start - 1e4);
  if (!base.crossed) {
    rep.diagnostic = "NoCrossing: psi stays above k up to r = " + format_number(r_max);
    return rep;
  }
  rep.crossed = true;
  rep.r_o = base.r_o;
  const auto rhs = riccati_rhs(k, m);
  const auto tail = integrate_ode<2>(rhs, base.at, base.r_o, r_max, {1e-14, 1e-12}, {}, (r_max - base.r_o) / 2000.0);
  rep.psi_tail_ok = true;
  double liminf = kInf;
  for (std::size_t i = 0; i < tail.r.size(); ++i) {
    const double r = tail.r[i];
    const double psi = 1.0 / tail.y[i][0];
    const double kv = k(r);
    if (psi > kv * (1.0 + 1e-6)) rep.psi_tail_ok = false;
    if (r >= 0.5 * (base.r_o + r_max)) liminf = std::min(liminf, kv * tail.y[i][1]);
    if (i % 20 == 0 || i + 1 == tail.r.size()) rep.samples.push_back({r, psi, kv});
  }
  rep.liminf_estimate = liminf;
  for (double shift : {-1.0, 1.0}) {
    const RiccatiRun p = riccati_run(k, m, r_max, shift);
    rep.perturbed_r_o.push_back(p.crossed ? p.r_o : kInf);
    rep.sensitivity = std::max(rep.sensitivity, std::abs((p.crossed ? p.r_o : kInf) - base.r_o));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Semilinear exterior problem
// ---------------------------------------------------------------------------

const char* to_string(SupportKind k) {
  switch (k) {
    case SupportKind::DecaysToZero: return "DecaysToZero";
    case SupportKind::CompactSupport: return "CompactSupport";
    case SupportKind::BoundedAway: return "BoundedAway";
  }
  return "DecaysToZero";
}

double SemilinearRhs::operator()(double u) const {
  // Lambda(0) = 0 is validated up front; custom expressions such as r^0.3
  // are not differentiable there, so the endpoint is not evaluated.
  if (custom) return u <= 0.0 ? 0.0 : (*custom)(u);
  return a * u + (b != 0.0 ? b * std::pow(u, p) : 0.0);
}

std::string SemilinearRhs::describe() const {
  if (custom) return "Lambda(u) = " + custom->canonical() + " (u written as r)";
  return "Lambda(u) = " + format_number(a) + " u + " + format_number(b) + " u^" + format_number(p);
}

namespace {

struct Shot {
  std::string outcome;
  double radius = 0.0;
  RadialProfile profile;
};

Shot shoot(const ModelManifold& M, const SemilinearRhs& rhs, double R0, double u0, double slope, double r_max,
           const OdeTolerance& tol) {
  OdeRhs<2> f = [&](const OdeState<2>& y, OdeState<2>& dy, double r) {
    dy[0] = y[1];
    dy[1] = rhs(std::max(y[0], 0.0)) - M.drift(r) * y[1];
  };
  auto event = [](double, const OdeState<2>& y) { return std::max(-y[0], y[1]); };
  const auto run = integrate_ode<2>(f, {u0, slope}, R0, r_max, tol, event, (r_max - R0) / 4000.0);
  Shot s;
  for (std::size_t i = 0; i < run.r.size(); ++i) {
    s.profile.grid.push_back(run.r[i]);
    s.profile.values.push_back(run.y[i][0]);
    s.profile.derivative_values.push_back(run.y[i][1]);
  }
  if (run.event_fired) {
    s.outcome = run.y_event[0] <= 0.0 ? "crossed" : "turned";
    s.radius = run.r_event;
  } else {
    s.outcome = "reached";
    s.radius = r_max;
  }
  return s;
}

}  // namespace

SemilinearResult semilinear_exterior(const ModelManifold& M, const SemilinearRhs& rhs, double R0, double u0,
                                     const SemilinearOptions& opts) {
  if (!(u0 > 0.0)) throw ValidationError("u0 must be positive");
  if (!(R0 > 0.0)) throw ValidationError("R0 must be positive");
  // Conditions on Lambda: Lambda(0) = 0 and Lambda > 0 on (0, u0].
  double l0;
  try {
    l0 = rhs.custom ? (*rhs.custom)(1e-60) : rhs(0.0);
  } catch (const DomainError&) {
    throw ValidationError("Lambda is not defined near 0");
  }
  if (std::abs(l0) > 1e-12) throw ValidationError("Lambda(0) must vanish");
  for (int i = 1; i <= 200; ++i) {
    const double u = u0 * std::pow(10.0, -12.0 * (200 - i) / 200.0);
    if (!(rhs(u) > 0.0)) throw ValidationError("Lambda must be positive on (0, u0]; fails at u = " + format_number(u));
  }
  SemilinearResult out;
  const double r_max = R0 + opts.r_max_offset;
  double s_hi = 0.0;
  Shot hi = shoot(M, rhs, R0, u0, s_hi, r_max, opts.ode);
  out.trace.push_back({s_hi, hi.outcome, hi.radius});
  if (hi.outcome != "turned") throw Error(ErrorKind::Shooting, "zero initial slope does not turn up");
  double s_lo = -u0;
  Shot lo;
  for (int k = 0;; ++k) {
    lo = shoot(M, rhs, R0, u0, s_lo, r_max, opts.ode);
    out.trace.push_back({s_lo, lo.outcome, lo.radius});
    if (lo.outcome == "crossed") break;
    if (lo.outcome == "turned") s_hi = s_lo, hi = lo;
    if (k > 60) throw Error(ErrorKind::Shooting, "no crossing slope found; bracketing lost");
    s_lo *= 2.0;
  }
  std::vector<double> cross_radii = {lo.radius};
  for (int it = 0; it < opts.max_bisections; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (!(mid > s_lo && mid < s_hi)) break;
    Shot s = shoot(M, rhs, R0, u0, mid, r_max, opts.ode);
    out.trace.push_back({mid, s.outcome, s.radius});
    if (s.outcome == "crossed") {
      s_lo = mid;
      lo = std::move(s);
      cross_radii.push_back(lo.radius);
    } else if (s.outcome == "turned") {
      s_hi = mid;
      hi = std::move(s);
    } else {
      // Neither event before r_max: this slope already follows the decaying branch.
      lo = std::move(s);
      break;
    }
  }
  // Crossing radius as a function of the distance d of the slope from the
  // decaying branch: compact support gives r_dead - C d^kappa with kappa > 0,
  // while a solution that decays without vanishing gives A - B log d, i.e.
  // equal increments for equal log-steps in d.
  const double s_star = 0.5 * (s_lo + s_hi);
  std::vector<std::pair<double, double>> crossings;  // (d, radius)
  for (const auto& t : out.trace)
    if (t.outcome == "crossed" && t.slope < s_star) crossings.emplace_back(s_star - t.slope, t.radius);
  auto nearest = [&](double target) -> const std::pair<double, double>* {
    const std::pair<double, double>* best = nullptr;
    for (const auto& c : crossings)
      if (!best || std::abs(std::log(c.first / target)) < std::abs(std::log(best->first / target))) best = &c;
    if (best && std::abs(std::log(best->first / target)) > std::log(4.0)) return nullptr;
    return best;
  };
  bool settled = false;
  const double D1 = std::ldexp(std::abs(s_star), -10);
  const auto* c1 = nearest(D1);
  const auto* c2 = nearest(std::ldexp(D1, -8));
  const auto* c3 = nearest(std::ldexp(D1, -16));
  if (c1 && c2 && c3 && c1 != c2 && c2 != c3) {
    const double k12 = std::log(c1->first / c2->first), k23 = std::log(c2->first / c3->first);
    const double q = ((c3->second - c2->second) / k23) / ((c2->second - c1->second) / k12);
    out.diagnostic = "crossing-radius increment ratio " + format_number(q) + " per 2^8 in slope distance";
    if (q > 0.0 && q < 0.8) {
      settled = true;
      out.r_dead = c3->second + (c3->second - c2->second) * q / (1.0 - q);
    }
  }
  // The profile is the part where both bracketing trajectories agree.
  RadialProfile prof;
  const double r_common = std::min(lo.profile.r_hi(), hi.profile.r_hi());
  for (std::size_t i = 0; i < lo.profile.size(); ++i) {
    const double r = lo.profile.grid[i];
    if (r > r_common) break;
    if (settled && r >= *out.r_dead) break;
    if (!settled && std::abs(lo.profile.values[i] - hi.profile(r)) > 1e-10 * u0) break;
    prof.grid.push_back(r);
    prof.values.push_back(std::max(lo.profile.values[i], 0.0));
    prof.derivative_values.push_back(lo.profile.derivative_values[i]);
  }
  if (settled) {
    out.kind = SupportKind::CompactSupport;
    if (prof.grid.back() < *out.r_dead) {
      prof.grid.push_back(*out.r_dead);
      prof.values.push_back(0.0);
      prof.derivative_values.push_back(0.0);
    }
    out.diagnostic += "; extrapolated r_dead = " + format_number(*out.r_dead);
  } else if (prof.values.back() > 1e-3 * u0 && std::abs(prof.derivative_values.back()) < 1e-6 * u0) {
    out.kind = SupportKind::BoundedAway;
    out.diagnostic += "; decaying branch levels off at " + format_number(prof.values.back());
  } else {
    out.kind = SupportKind::DecaysToZero;
    out.diagnostic += (out.diagnostic.empty() ? "" : "; ") +
                      std::string("crossing radius drifts outward as the bracket shrinks; solution positive up to r = ") +
                      format_number(prof.r_hi());
  }
  prof.bc_meta = "u(" + format_number(R0) + ") = " + format_number(u0) + ", " + rhs.describe();
  prof.monotone_decreasing = prof.check_monotone();
  out.profile = std::move(prof);
  return out;
}

// ---------------------------------------------------------------------------
// Heat mass
// ---------------------------------------------------------------------------

MassCurve heat_mass(const ModelManifold& M, double r_init, double T, double R_trunc, int n_space, int n_time) {
  constexpr double r_in = 1e-4;
  if (!(r_init > r_in && r_init < R_trunc)) throw DomainError("need 1e-4 < r_init < R_trunc");
  if (!(T >= 0.0)) throw DomainError("T must be non-negative");
  if (n_space < 10 || n_time < 1) throw DomainError("grid too coarse");
  const int N = n_space;
  const double h = (R_trunc - r_in) / N;
  std::vector<double> x(N + 1);
  for (int i = 0; i <= N; ++i) x[i] = r_in + h * i;
  x[N] = R_trunc;
  auto log_a = [&](double r) { return M.log_area_density(r); };
  auto log_inv_a = [&](double r) { return -M.log_area_density(r); };
  // Dual-cell masses and edge resistances, both as logarithms.
  std::vector<double> logA(N), logK(N);
  for (int i = 0; i < N; ++i) {
    const double lo = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    const double hi = 0.5 * (x[i] + x[i + 1]);
    logA[i] = log_integrate(log_a, lo, hi, 1e-10).log_value;
    logK[i] = log_integrate(log_inv_a, x[i], x[i + 1], 1e-10).log_value;
  }
  // Smooth bump of half-width R_trunc/200 in the density u, stored as cell masses.
  const double w = R_trunc / 200.0;
  std::vector<double> p(N, 0.0);
  double top = -kInf;
  std::vector<double> lp(N, -kInf);
  for (int i = 0; i < N; ++i) {
    const double s = (x[i] - r_init) / w;
    if (std::abs(s) < 1.0) {
      const double c = std::cos(0.5 * M_PI * s);
      lp[i] = logA[i] + 2.0 * std::log(c);
      top = std::max(top, lp[i]);
    }
  }
  if (top == -kInf) {
    // Bump narrower than the grid: put the mass on the nearest node.
    const int i = std::clamp(static_cast<int>(std::lround((r_init - r_in) / h)), 0, N - 1);
    lp[i] = 0.0;
    top = 0.0;
  }
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    p[i] = lp[i] == -kInf ? 0.0 : std::exp(lp[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  // Flux across edge i: F_i = c_i p_i - d_i p_{i+1}; u_N = 0 at the absorbing end.
  std::vector<double> c(N), d(N);
  for (int i = 0; i < N; ++i) {
    c[i] = std::exp(-logA[i] - logK[i]);
    d[i] = i + 1 < N ? std::exp(-logA[i + 1] - logK[i]) : 0.0;
  }
  MassCurve out;
  out.truncation_radius = R_trunc;
  out.times.push_back(0.0);
  out.mass.push_back(1.0);
  if (T == 0.0) return out;
  const double dt = T / n_time;
  const int stride = std::max(1, n_time / 1000);
  std::vector<double> lower(N), diag(N), upper(N), cp(N), dp(N);
  for (int i = 0; i < N; ++i) {
    diag[i] = 1.0 + dt * c[i] + (i > 0 ? dt * d[i - 1] : 0.0);
    upper[i] = i + 1 < N ? -dt * d[i] : 0.0;
    lower[i] = i > 0 ? -dt * c[i - 1] : 0.0;
  }
  double leaked = 0.0;
  for (int n = 1; n <= n_time; ++n) {
    // Thomas algorithm.
    cp[0] = upper[0] / diag[0];
    dp[0] = p[0] / diag[0];
    for (int i = 1; i < N; ++i) {
      const double denom = diag[i] - lower[i] * cp[i - 1];
      cp[i] = upper[i] / denom;
      dp[i] = (p[i] - lower[i] * dp[i - 1]) / denom;
    }
    p[N - 1] = dp[N - 1];
    for (int i = N - 2; i >= 0; --i) p[i] = dp[i] - cp[i] * p[i + 1];
    leaked += dt * c[N - 1] * p[N - 1];
    if (n % stride == 0 || n == n_time) {
      double mass = 0.0;
      for (double v : p) mass += v;
      out.times.push_back(n * dt);
      out.mass.push_back(std::min(1.0, mass));
    }
  }
  double mass = 0.0;
  for (double v : p) mass += v;
  out.leakage_estimate = leaked;
  out.conservation_error = std::abs(mass + leaked - 1.0);
  return out;
}

MassStudy heat_mass_doubling(const ModelManifold& M, double r_init, double T, double R_start, int max_doublings,
                             double tol, int n_space, int n_time) {
  MassStudy study;
  double R = R_start;
  double prev = kInf;
  for (int k = 0; k <= max_doublings; ++k, R *= 2.0) {
    study.curves.push_back(heat_mass(M, r_init, T, R, n_space, n_time));
    const double defect = 1.0 - study.curves.back().mass.back();
    study.defect = defect;
    if (std::isfinite(prev)) {
      study.truncation_sensitivity = std::abs(defect - prev);
      if (study.truncation_sensitivity < tol) {
        study.stabilized = true;
        return study;
      }
    }
    prev = defect;
  }
  return study;
}

}  // namespace wml
