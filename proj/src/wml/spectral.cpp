#include "wml/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "wml/error.hpp"
#include "wml/integrability.hpp"
#include "wml/radial_ode.hpp"

namespace wml {

namespace odeint = boost::numeric::odeint;

const char* to_string(EigenMethod m) {
  return m == EigenMethod::PrueferShooting ? "PrueferShooting" : "FiniteDifference";
}

const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::BartaVector: return "BartaVector";
    case BoundKind::BartaFunction: return "BartaFunction";
    case BoundKind::Brooks: return "Brooks";
    case BoundKind::Cheng: return "Cheng";
    case BoundKind::QianI: return "QianI";
    case BoundKind::QianII: return "QianII";
    case BoundKind::QianIII: return "QianIII";
    case BoundKind::HalfDriftSquared: return "HalfDriftSquared";
    case BoundKind::SolitonScalar: return "SolitonScalar";
    case BoundKind::SemilinearInf: return "SemilinearInf";
    case BoundKind::Prop40: return "Prop40";
  }
  return "?";
}

const char* to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Ok: return "Ok";
    case BoundStatus::Inapplicable: return "Inapplicable";
    case BoundStatus::UnboundedBelow: return "UnboundedBelow";
    case BoundStatus::Unbounded: return "Unbounded";
    case BoundStatus::NonExistence: return "NonExistence";
  }
  return "?";
}

const char* to_string(AprioriOutcome o) {
  switch (o) {
    case AprioriOutcome::Bounded: return "Bounded";
    case AprioriOutcome::BlowUp: return "BlowUp";
    case AprioriOutcome::ExitsPositivity: return "ExitsPositivity";
    case AprioriOutcome::Undetermined: return "Undetermined";
  }
  return "?";
}

namespace {

// The operator -(a u')'/a on an interval, given by log a and the dimension
// that fixes the regular singular behaviour at the pole.
struct RadialOperator {
  std::function<Jet2(double)> log_density;
  int dimension = 2;

  double drift(double r) const { return log_density(r).d1; }
};

RadialOperator make_operator(const ModelManifold& M) {
  return {[&M](double r) { return M.log_density_jet(r); }, M.dimension()};
}

// Modified Prufer angle, tan(theta) = k u / u'. Zeros of u sit at multiples
// of pi and are crossed upward, so theta(r_hi) - pi changes sign exactly at
// the first Dirichlet eigenvalue.
double prufer_end_angle(const RadialOperator& op, double r_lo, double r_hi, double lambda, double k,
                        const OdeTolerance& tol) {
  using State = std::array<double, 1>;
  double r0 = r_lo;
  State theta{0.0};
  if (r_lo == 0.0) {
    const double eps = 1e-7 * r_hi;
    const double m = op.dimension;
    theta[0] = std::atan2(k * (1.0 - lambda * eps * eps / (2.0 * m)), -lambda * eps / m);
    r0 = eps;
  }
  auto rhs = [&](const State& y, State& dy, double r) {
    const double s = std::sin(y[0]), c = std::cos(y[0]);
    dy[0] = k * c * c + (lambda / k) * s * s + op.drift(r) * s * c;
  };
  auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  const double span = r_hi - r0;
  const double dt0 = std::min(1e-3 * span, r_lo == 0.0 ? 0.1 * r0 : 1e-3 * span);
  odeint::integrate_adaptive(stepper, rhs, theta, r0, r_hi, dt0);
  if (!std::isfinite(theta[0])) throw Error(ErrorKind::StepUnderflow, "Prufer angle is not finite");
  return theta[0];
}

struct ShootOutcome {
  double lambda;
  double width;
  std::size_t solves;
};

// `upper` is a known eigenvalue bound from above, e.g. a smaller domain.
ShootOutcome shoot_lambda1(const RadialOperator& op, double r_lo, double r_hi, const SpectralOptions& opts,
                           std::optional<double> upper = std::nullopt) {
  if (!(r_lo >= 0.0 && r_hi > r_lo)) throw DomainError("need 0 <= r_lo < r_hi");
  std::size_t solves = 0;
  auto above = [&](double lambda) {
    ++solves;
    const double k = std::sqrt(std::max(lambda, 1e-300));
    return prufer_end_angle(op, r_lo, r_hi, lambda, k, opts.ode) > std::numbers::pi;
  };
  const double span = r_hi - r_lo;
  double hi = std::pow(std::numbers::pi / span, 2);
  double lo = 0.0;
  if (upper && *upper > 0.0 && above(*upper * (1.0 + 1e-9))) {
    hi = *upper * (1.0 + 1e-9);
    for (double drop = 1e-4;; drop *= 4.0) {
      const double trial = drop >= 1.0 ? 0.0 : hi * (1.0 - drop);
      if (trial == 0.0 || !above(trial)) {
        lo = trial;
        break;
      }
      hi = trial;
    }
  } else if (above(hi)) {
    int halvings = 0;
    while (halvings < 1100) {
      const double half = 0.5 * hi;
      if (!above(half)) {
        lo = half;
        break;
      }
      hi = half;
      ++halvings;
    }
  } else {
    lo = hi;
    for (;;) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw Error(ErrorKind::Shooting, "no eigenvalue bracket found");
      if (above(hi)) break;
      lo = hi;
    }
  }
  // Fixed scale inside the bracket makes theta(r_hi) continuous in lambda.
  const double k = std::sqrt(hi);
  auto F = [&](double lambda) {
    ++solves;
    return prufer_end_angle(op, r_lo, r_hi, lambda, k, opts.ode) - std::numbers::pi;
  };
  double flo = F(lo), fhi = F(hi);
  if (flo >= 0.0 || fhi <= 0.0) {
    // Sign lost to the angle tolerance: fall back to plain bisection.
    while (hi - lo > opts.rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (above(mid) ? hi : lo) = mid;
    }
    return {0.5 * (lo + hi), hi - lo, solves};
  }
  const double rel = opts.rel_tol;
  auto stop = [rel](double a, double b) { return std::abs(b - a) <= 0.5 * rel * std::max(std::abs(a), std::abs(b)); };
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, stop, iters);
  return {0.5 * (a + b), b - a, solves};
}

// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
double smallest_eigenvalue(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t n = d.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double rad = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - rad);
    hi = std::max(hi, d[i] + rad);
  }
  auto count_below = [&](double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double off = i > 0 ? e[i - 1] * e[i - 1] / q : 0.0;
      q = d[i] - x - off;
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Nodes equidistributing |drift|/2 plus end-layer and background terms.
std::vector<double> graded_mesh(const RadialOperator& op, double r_lo, double r_hi, std::size_t n) {
  const double span = r_hi - r_lo;
  const double ell = 1e-3 * span;
  const std::size_t samples = std::max<std::size_t>(8 * n, 20000);
  std::vector<double> s(samples + 1), cum(samples + 1, 0.0);
  auto monitor = [&](double r) {
    const double rr = r_lo == 0.0 ? std::max(r, 1e-3 * span / samples) : r;
    double mu = 8.0 / span + 1.0 / (r - r_lo + ell) + 1.0 / (r_hi - r + ell);
    const double dr = op.drift(rr);
    if (std::isfinite(dr)) mu += 0.5 * std::abs(dr);
    return mu;
  };
  double prev = monitor(r_lo);
  s[0] = r_lo;
  for (std::size_t j = 1; j <= samples; ++j) {
    s[j] = r_lo + span * static_cast<double>(j) / samples;
    const double cur = monitor(s[j]);
    cum[j] = cum[j - 1] + 0.5 * (prev + cur) * (s[j] - s[j - 1]);
    prev = cur;
  }
  std::vector<double> mesh(n + 1);
  mesh[0] = r_lo;
  mesh[n] = r_hi;
  std::size_t j = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double target = cum[samples] * static_cast<double>(i) / n;
    while (cum[j + 1] < target) ++j;
    const double t = (target - cum[j]) / (cum[j + 1] - cum[j]);
    mesh[i] = s[j] + t * (s[j + 1] - s[j]);
  }
  return mesh;
}

double fd_lambda1(const RadialOperator& op, const std::vector<double>& mesh) {
  const std::size_t n = mesh.size() - 1;
  const bool ball = mesh[0] == 0.0;
  std::vector<double> phi(n + 1), phi_half(n);
  for (std::size_t i = 1; i < n; ++i) phi[i] = op.log_density(mesh[i]).value;
  for (std::size_t i = ball ? 1 : 0; i < n; ++i) phi_half[i] = op.log_density(0.5 * (mesh[i] + mesh[i + 1])).value;
  std::vector<double> d(n - 1), e(n - 2 > 0 ? n - 2 : 0);
  for (std::size_t i = 1; i < n; ++i) {
    const double hl = mesh[i] - mesh[i - 1], hr = mesh[i + 1] - mesh[i];
    const double w = 0.5 * (hl + hr);
    double diag = std::exp(phi_half[i] - phi[i]) / (hr * w);
    if (!(ball && i == 1)) diag += std::exp(phi_half[i - 1] - phi[i]) / (hl * w);
    d[i - 1] = diag;
    if (i + 1 < n) {
      const double wr = 0.5 * (hr + (mesh[i + 2] - mesh[i + 1]));
      e[i - 1] = -std::exp(phi_half[i] - 0.5 * (phi[i] + phi[i + 1])) / (hr * std::sqrt(w * wr));
    }
  }
  return smallest_eigenvalue(d, e);
}

EigenResult fd_interval(const RadialOperator& op, double r_lo, double r_hi, std::size_t nodes) {
  if (!(r_lo >= 0.0 && r_hi > r_lo)) throw DomainError("need 0 <= r_lo < r_hi");
  nodes = std::max<std::size_t>(nodes, 16);
  const auto coarse = graded_mesh(op, r_lo, r_hi, nodes);
  std::vector<double> fine;
  fine.reserve(2 * nodes + 1);
  for (std::size_t i = 0; i < nodes; ++i) {
    fine.push_back(coarse[i]);
    fine.push_back(0.5 * (coarse[i] + coarse[i + 1]));
  }
  fine.push_back(coarse.back());
  const double l1 = fd_lambda1(op, coarse);
  const double l2 = fd_lambda1(op, fine);
  EigenResult res;
  res.method = EigenMethod::FiniteDifference;
  res.lambda1 = (4.0 * l2 - l1) / 3.0;
  res.r_lo = r_lo;
  res.r_hi = r_hi;
  res.mesh_nodes = fine.size();
  res.residual = std::abs(l2 - l1) / 3.0;
  return res;
}

EigenResult interval_impl(const RadialOperator& op, double r_lo, double r_hi, const SpectralOptions& opts,
                          std::optional<double> upper = std::nullopt) {
  const auto shot = shoot_lambda1(op, r_lo, r_hi, opts, upper);
  EigenResult res;
  res.lambda1 = shot.lambda;
  res.method = EigenMethod::PrueferShooting;
  res.r_lo = r_lo;
  res.r_hi = r_hi;
  res.mesh_nodes = shot.solves;
  res.residual = shot.width;
  if (opts.cross_check) {
    const auto fd = fd_interval(op, r_lo, r_hi, opts.fd_nodes);
    res.cross_check = fd.lambda1;
    res.residual = std::abs(fd.lambda1 - shot.lambda);
    if (res.residual > std::max(1e-6, 1e-4 * shot.lambda))
      res.diagnostic = "finite-difference cross-check disagrees: " + format_number(fd.lambda1);
  }
  return res;
}

}  // namespace

EigenResult lambda1_interval(const ModelManifold& M, double r_lo, double r_hi, const SpectralOptions& opts) {
  return interval_impl(make_operator(M), r_lo, r_hi, opts);
}

EigenResult lambda1_interval_fd(const ModelManifold& M, double r_lo, double r_hi, std::size_t nodes) {
  return fd_interval(make_operator(M), r_lo, r_hi, nodes);
}

EigenResult lambda1_exterior(const ModelManifold& M, double R, const ExteriorSpectralOptions& opts) {
  if (!(R > 0.0)) throw DomainError("exterior radius must be positive");
  const auto op = make_operator(M);
  EigenResult res;
  res.r_lo = R;
  double prev = kInfinity;
  for (int k = 1; k <= opts.max_doublings + 1; ++k) {
    const double outer = std::ldexp(R, k);
    const auto step = interval_impl(op, R, outer, opts.interval,
                                    std::isfinite(prev) ? std::optional<double>(prev) : std::nullopt);
    res.history.emplace_back(outer, step.lambda1);
    res.mesh_nodes += step.mesh_nodes;
    res.r_hi = outer;
    res.lambda1 = step.lambda1;
    const double change = std::abs(step.lambda1 - prev);
    res.residual = change;
    if (change < std::max(opts.tol_abs, opts.tol_rel * step.lambda1)) return res;
    prev = step.lambda1;
  }
  const auto& h = res.history;
  throw Error(ErrorKind::NoConvergence, "exterior lambda1 not stabilized after " +
                                            std::to_string(opts.max_doublings) + " doublings; last values " +
                                            format_number(h[h.size() - 2].second) + ", " +
                                            format_number(h.back().second));
}

EssSpecReport ess_spectrum_bottom(const ModelManifold& M, const std::vector<double>& radii,
                                  const ExteriorSpectralOptions& opts) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("radii must be increasing");
  EssSpecReport rep;
  rep.radii = radii;
  std::vector<std::future<EigenResult>> jobs;
  for (double R : radii) jobs.push_back(std::async(std::launch::async, [&M, R, &opts] { return lambda1_exterior(M, R, opts); }));
  for (auto& j : jobs) rep.exterior.push_back(j.get());
  std::vector<double> v;
  for (const auto& e : rep.exterior) v.push_back(e.lambda1);
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - std::max(1e-6, 1e-6 * std::abs(v[i - 1]))) rep.monotone_ok = false;
  const std::size_t n = v.size();
  if (n >= 3) {
    const double d1 = v[n - 2] - v[n - 3], d2 = v[n - 1] - v[n - 2];
    if (d1 > 0.25 * std::abs(v[n - 3]) && d2 > 0.25 * std::abs(v[n - 2]) && d2 >= d1) {
      rep.unbounded = true;
      rep.diagnostic = "exterior lambda1 keeps growing: essential spectrum empty (discrete spectrum)";
      return rep;
    }
  }
  if (n > 0) rep.bottom_estimate = *std::max_element(v.begin(), v.end());
  if (!rep.monotone_ok) rep.diagnostic = "exterior lambda1 not monotone in R";
  return rep;
}

// ---------------------------------------------------------------------------
// Barta
// ---------------------------------------------------------------------------

namespace {

std::vector<double> barta_grid(double r_lo, double r_hi, const BartaOptions& opts) {
  const std::size_t n = std::max<std::size_t>(opts.samples, 16);
  double a = r_lo, b = r_hi;
  if (!std::isfinite(b)) b = std::max(opts.far_radius, 10.0 * std::max(r_lo, 1.0));
  if (a == 0.0) a = 1e-8 * b;
  std::vector<double> grid(n);
  const double ratio = std::log(b / a);
  for (std::size_t j = 0; j < n; ++j) grid[j] = a * std::exp(ratio * static_cast<double>(j) / (n - 1));
  grid.back() = b;
  return grid;
}

BoundValue barta_sampled(const std::function<double(double)>& value, double r_lo, double r_hi, BoundKind kind,
                         const BartaOptions& opts) {
  const auto grid = barta_grid(r_lo, r_hi, opts);
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = value(grid[j]);
  BoundValue out;
  out.kind = kind;
  out.inputs["r_lo"] = r_lo;
  out.inputs["r_hi"] = r_hi;
  out.inputs["samples"] = static_cast<double>(grid.size());
  const std::size_t i = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  const double grid_inf = v[i];
  const std::size_t n = grid.size();
  if (!std::isfinite(r_hi) && i + 1 == n) {
    const std::size_t back = static_cast<std::size_t>(std::floor((n - 1) * (1.0 - std::log(10.0) / std::log(grid.back() / grid.front()))));
    const double earlier = v[std::min(back, n - 1)];
    if (grid_inf < earlier - 0.5 * std::max(1.0, std::abs(earlier))) {
      out.status = BoundStatus::UnboundedBelow;
      out.value = -kInfinity;
      out.note = "sampled infimum diverges to -inf";
      return out;
    }
  }
  if (grid_inf < -1e12) {
    out.status = BoundStatus::UnboundedBelow;
    out.value = -kInfinity;
    out.note = "sampled infimum below -1e12";
    return out;
  }
  double polished = grid_inf;
  if (i > 0 && i + 1 < n) {
    const auto [x, fx] = boost::math::tools::brent_find_minima(value, grid[i - 1], grid[i + 1], 50);
    (void)x;
    polished = std::min(polished, fx);
  }
  double margin_inf = polished;
  for (std::size_t j = 0; j + 1 < n; ++j)
    margin_inf = std::min(margin_inf, std::min(v[j], v[j + 1]) - 0.5 * std::abs(v[j + 1] - v[j]));
  out.value = margin_inf;
  out.inputs["grid_inf"] = grid_inf;
  out.inputs["polished_inf"] = polished;
  out.note = "certified-by-sampling";
  return out;
}

}  // namespace

BoundValue barta_vector_bound(const ModelManifold& M, const std::function<Jet2(double)>& w, double r_lo,
                              double r_hi, const BartaOptions& opts) {
  auto value = [&](double r) {
    const Jet2 wj = w(r);
    return wj.d1 + wj.value * M.drift(r) - wj.value * wj.value;
  };
  return barta_sampled(value, r_lo, r_hi, BoundKind::BartaVector, opts);
}

BoundValue barta_vector_bound(const ModelManifold& M, const RadialFunction& w, double r_lo, double r_hi,
                              const BartaOptions& opts) {
  auto out = barta_vector_bound(M, [&w](double r) { return w.jet(r); }, r_lo, r_hi, opts);
  out.note += "; w = " + w.source();
  return out;
}

BoundValue barta_function_bound(const ModelManifold& M, const std::function<Jet2(double)>& u, double r_lo,
                                double r_hi, const BartaOptions& opts) {
  auto value = [&](double r) {
    const Jet2 uj = u(r);
    if (!(uj.value > 0.0)) throw ValidationError("Barta test function must be positive; u(" + format_number(r) + ") = " + format_number(uj.value));
    return -(uj.d2 + M.drift(r) * uj.d1) / uj.value;
  };
  return barta_sampled(value, r_lo, r_hi, BoundKind::BartaFunction, opts);
}

BoundValue barta_function_bound(const ModelManifold& M, const RadialFunction& u, double r_lo, double r_hi,
                                const BartaOptions& opts) {
  auto out = barta_function_bound(M, [&u](double r) { return u.jet(r); }, r_lo, r_hi, opts);
  out.note += "; u = " + u.source();
  return out;
}

// ---------------------------------------------------------------------------
// Cheng, Qian and closed forms
// ---------------------------------------------------------------------------

double spaceform_ball_lambda1(double curvature, int dim, double R) {
  if (!(R > 0.0)) throw DomainError("ball radius must be positive");
  if (dim < 2) throw DomainError("spaceform dimension must be at least 2");
  const double s = std::sqrt(std::abs(curvature));
  if (curvature > 0.0 && R >= std::numbers::pi / s)
    throw DomainError("ball radius reaches the diameter of the sphere of curvature " + format_number(curvature));
  RadialOperator op;
  op.dimension = dim;
  const double n1 = dim - 1;
  op.log_density = [curvature, s, n1](double r) {
    if (curvature == 0.0) return Jet2{n1 * std::log(r), n1 / r, -n1 / (r * r)};
    if (curvature < 0.0) {
      const double x = s * r;
      // log sinh(x) = x + log1p(-e^{-2x}) - log 2
      const double lg = x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0 * s);
      const double coth = 1.0 / std::tanh(x);
      const double sh = std::sinh(x);
      return Jet2{n1 * lg, n1 * s * coth, -n1 * s * s / (sh * sh)};
    }
    const double x = s * r;
    const double cot = std::cos(x) / std::sin(x);
    const double sn = std::sin(x);
    return Jet2{n1 * std::log(std::sin(x) / s), n1 * s * cot, -n1 * s * s / (sn * sn)};
  };
  SpectralOptions opts;
  opts.cross_check = false;
  return shoot_lambda1(op, 0.0, R, opts).lambda;
}

BoundValue cheng_upper_bound(double alpha, double beta, int m, double R) {
  if (alpha < 0.0 || beta < 0.0) throw DomainError("Cheng constants must be non-negative");
  BoundValue out;
  out.kind = BoundKind::Cheng;
  const double kappa = (alpha + beta) / m;
  out.value = spaceform_ball_lambda1(-kappa, m + 1, R);
  out.inputs = {{"alpha", alpha}, {"beta", beta}, {"m", static_cast<double>(m)}, {"R", R}, {"curvature", -kappa}};
  out.note = "ball in the (m+1)-dimensional hyperbolic spaceform";
  return out;
}

std::pair<double, double> cheng_constants(const ModelManifold& M, double R) {
  double ric_min = kInfinity, fp_max = 0.0;
  const int n = 2000;
  for (int j = 1; j <= n; ++j) {
    const double r = R * (0.001 + 0.999 * j / n);
    const auto ric = M.ricci_f(r);
    ric_min = std::min(ric_min, ric.min());
    fp_max = std::max(fp_max, std::abs(M.weight().jet(r).d1));
  }
  return {std::max(0.0, -ric_min), fp_max * fp_max};
}

BoundValue qian_drift_bound_I(double k, double C, int m, double r) {
  BoundValue out;
  out.kind = BoundKind::QianI;
  out.value = C + (m - 1) / r + k * k * r;
  out.inputs = {{"k", k}, {"C", C}, {"m", static_cast<double>(m)}, {"r", r}};
  return out;
}

BoundValue qian_drift_bound_II(const RadialFunction& k1, const RadialFunction& k2, int m, double r) {
  BoundValue out;
  out.kind = BoundKind::QianII;
  const auto cmp = comparison_g(k1, k2, m, std::max(2.0 * r, 1.0));
  out.value = m * cmp.psi_at(r);
  out.inputs = {{"m", static_cast<double>(m)}, {"r", r}};
  out.note = "k1 = " + k1.source() + ", k2 = " + k2.source();
  return out;
}

BoundValue qian_drift_bound_III(double k, double C, double d_op, int m, double rho) {
  BoundValue out;
  out.kind = BoundKind::QianIII;
  out.value = (m - 1) / rho + (k + 2.0 * C) * rho / 3.0 + C * (1.0 + d_op);
  out.inputs = {{"k", k}, {"C", C}, {"d_op", d_op}, {"m", static_cast<double>(m)}, {"rho", rho}};
  return out;
}

BoundValue half_drift_squared_bound(const ModelManifold& M, double R) {
  BoundValue out;
  out.kind = BoundKind::HalfDriftSquared;
  out.inputs["R"] = R;
  BartaOptions grid_opts;
  const auto grid = barta_grid(R, kInfinity, grid_opts);
  std::vector<double> d(grid.size());
  bool pos = false, neg = false;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    d[j] = M.drift(grid[j]);
    if (d[j] > 0) pos = true;
    if (d[j] < 0) neg = true;
  }
  if (pos && neg) {
    out.status = BoundStatus::Inapplicable;
    out.note = "drift changes sign beyond R";
    return out;
  }
  std::vector<double> a(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) a[j] = std::abs(d[j]);
  const std::size_t i = static_cast<std::size_t>(std::min_element(a.begin(), a.end()) - a.begin());
  double c = a[i];
  const std::size_t n = a.size();
  if (i + 1 == n) {
    // Still decreasing at the sampling cap: Aitken limit of |drift| at cap/4, cap/2, cap.
    const double far = grid.back();
    const double a1 = std::abs(M.drift(far / 4)), a2 = std::abs(M.drift(far / 2)), a3 = a[n - 1];
    const double den = a1 + a3 - 2.0 * a2;
    if (den > 0.0) c = std::clamp((a1 * a3 - a2 * a2) / den, 0.0, a3);
  }
  out.value = 0.25 * c * c;
  out.inputs["c"] = c;
  return out;
}

BrooksEssRecord brooks_vs_ess(const ModelManifold& M, const EssSpecReport& ess, double tol) {
  BrooksEssRecord rec;
  const auto brooks = brooks_bound(M);
  if (!brooks.finite_volume && !brooks.unbounded) rec.brooks = brooks.value;
  rec.ess_bottom = ess.bottom_estimate;
  if (brooks.finite_volume) {
    rec.skipped = true;
    rec.note = "finite weighted volume: volume-growth bound does not apply";
  } else if (brooks.unbounded || !ess.bottom_estimate) {
    rec.skipped = true;
    rec.note = std::string(brooks.unbounded ? "volume-growth bound unbounded" : "essential spectrum bottom unbounded");
  } else {
    rec.consistent = *rec.ess_bottom <= *rec.brooks + tol;
    rec.note = rec.consistent ? "ess bottom below volume-growth bound" : "ess bottom exceeds volume-growth bound";
  }
  return rec;
}

BrooksEssRecord brooks_vs_ess(const ModelManifold& M) { return brooks_vs_ess(M, ess_spectrum_bottom(M)); }

BoundValue semilinear_inf_bound(double a, double b, double sigma, double ess_bottom) {
  if (!(b > 0.0) || !(sigma > 1.0)) throw DomainError("need b > 0 and sigma > 1");
  BoundValue out;
  out.kind = BoundKind::SemilinearInf;
  out.inputs = {{"a", a}, {"b", b}, {"sigma", sigma}, {"ess_bottom", ess_bottom}};
  const double num = a + ess_bottom;
  if (num < 0.0) {
    out.status = BoundStatus::NonExistence;
    out.value = 0.0;
    out.note = "a + ess bottom < 0: no positive solution at infinity";
    return out;
  }
  out.value = std::pow(num / b, 1.0 / (sigma - 1.0));
  return out;
}

BoundValue prop40_bound(double a, double b, double sigma, double c, double R) {
  if (!(b > 0.0) || !(sigma > 1.0) || !(R > 0.0) || a < 0.0 || c < 0.0)
    throw DomainError("need a >= 0, b > 0, sigma > 1, c >= 0, R > 0");
  BoundValue out;
  out.kind = BoundKind::Prop40;
  out.inputs = {{"a", a}, {"b", b}, {"sigma", sigma}, {"c", c}, {"R", R}};
  out.value = std::pow(a / b + (c / b) * (1.0 + R * R) / (R * R), 1.0 / (sigma - 1.0));
  return out;
}

double prop40_constant(double alpha, double beta, int m, double R) {
  return cheng_upper_bound(alpha, beta, m, R).value * R * R / (1.0 + R * R);
}

BoundValue soliton_scalar_bound(double inf_scalar, int m, double soliton_lambda) {
  BoundValue out;
  out.kind = BoundKind::SolitonScalar;
  out.value = (inf_scalar - m * soliton_lambda) / m;
  out.inputs = {{"inf_S", inf_scalar}, {"m", static_cast<double>(m)}, {"lambda", soliton_lambda}};
  out.note = "lower bound for the bottom of the essential spectrum";
  return out;
}

AprioriReport apriori_check(const ModelManifold& M, double a, double b, double sigma, const std::vector<double>& u0s,
                            double r_max) {
  if (!(b > 0.0) || !(sigma > 1.0)) throw DomainError("need b > 0 and sigma > 1");
  AprioriReport rep;
  rep.bound = std::pow(std::max(-a, 0.0) / b, 1.0 / (sigma - 1.0));
  const double m = M.dimension();
  for (double u0 : u0s) {
    AprioriSample s;
    s.u0 = u0;
    const double c = a * u0 + b * std::pow(u0, sigma);
    const double eps = 1e-6;
    const double cap = 1e6 * std::max({rep.bound, u0, 1.0});
    OdeRhs<2> rhs = [&](const OdeState<2>& y, OdeState<2>& dy, double r) {
      const double u = std::max(y[0], 0.0);
      dy[0] = y[1];
      dy[1] = a * u + b * std::pow(u, sigma) - M.drift(r) * y[1];
    };
    auto event = [&](double, const OdeState<2>& y) { return std::max(y[0] - cap, -y[0]); };
    try {
      const auto run = integrate_ode<2>(rhs, {u0 + c * eps * eps / (2 * m), c * eps / m}, eps, r_max,
                                        OdeTolerance{1e-12, 1e-10}, event);
      double sup = u0;
      for (const auto& y : run.y) sup = std::max(sup, y[0]);
      s.sup = sup;
      if (run.event_fired) {
        s.outcome = run.y_event[0] > 0.0 ? AprioriOutcome::BlowUp : AprioriOutcome::ExitsPositivity;
      } else {
        const auto& last = run.y.back();
        s.outcome = (last[1] > 0.0 && last[0] > u0) ? AprioriOutcome::Undetermined : AprioriOutcome::Bounded;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StepUnderflow) throw;
      s.outcome = AprioriOutcome::BlowUp;
      s.sup = kInfinity;
    }
    if (s.outcome == AprioriOutcome::Bounded && s.sup > rep.bound * (1.0 + 1e-9)) rep.holds = false;
    rep.samples.push_back(s);
  }
  return rep;
}

}  // namespace wml
