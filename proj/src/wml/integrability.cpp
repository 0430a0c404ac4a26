#include "wml/integrability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "wml/error.hpp"

namespace wml {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Octave breakpoints: geometric refinement toward an end where the integrand
// changes by many e-folds over the octave.
std::vector<double> octave_breakpoints(const LogDensity& fn, double a, double b) {
  std::vector<double> bp = {a, b};
  const double len = b - a;
  const double sa = fn(a).d1;
  const double sb = fn(b).d1;
  if (sa < 0 && -sa * len > 20.0) {
    for (double w = 0.25 / -sa; w < 0.5 * len; w *= 2.0) bp.push_back(a + w);
  }
  if (sb > 0 && sb * len > 20.0) {
    for (double w = 0.25 / sb; w < 0.5 * len; w *= 2.0) bp.push_back(b - w);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

double geometric_tail(double last_increment, double rho) { return last_increment * rho / (1.0 - rho); }

}  // namespace

const char* to_string(IntegralState s) {
  switch (s) {
    case IntegralState::Convergent: return "Convergent";
    case IntegralState::Divergent: return "Divergent";
    case IntegralState::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

const char* to_string(TailKind t) { return t == TailKind::AtInfinity ? "AtInfinity" : "AtZeroPlus"; }

const char* to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "Yes";
    case Answer::No: return "No";
    case Answer::Unknown: return "Unknown";
  }
  return "Unknown";
}

const char* to_string(Property p) {
  return p == Property::StochasticCompleteness ? "StochasticCompleteness" : "Feller";
}

IntegrabilityVerdict classify_integral(const LogDensity& fn, TailKind tail, const ClassifyOptions& opts,
                                       std::string name) {
  IntegrabilityVerdict v;
  v.name = std::move(name);
  const double log_cap = std::log(1e12);
  const double R0 = opts.origin;
  double log_total = -kInf;
  std::vector<double> log_inc;
  double log_ref = -kInf;
  int rising = 0;
  try {
    for (int j = 0; j < opts.max_octaves; ++j) {
      double lo, hi;
      if (tail == TailKind::AtInfinity) {
        lo = std::ldexp(R0, j);
        hi = std::ldexp(R0, j + 1);
      } else {
        lo = std::ldexp(R0, -(j + 1));
        hi = std::ldexp(R0, -j);
      }
      const auto bp = octave_breakpoints(fn, lo, hi);
      auto log_f = [&](double s) { return fn(s).value; };
      const LogQuadResult q = log_integrate(log_f, bp, opts.rel_tol, 8000);
      if (!q.converged && q.log_error > q.log_value + std::log(1e-6))
        throw Error(ErrorKind::Quadrature, "octave [" + format_number(lo) + ", " + format_number(hi) +
                                               "] not resolved");
      log_inc.push_back(q.log_value);
      if (log_ref == -kInf) log_ref = q.log_value;
      log_total = log_add(log_total, q.log_value);
      v.partial_values.push_back({tail == TailKind::AtInfinity ? hi : lo, log_total});
      if (j >= 1) {
        const double rho = std::exp(log_inc[j] - log_inc[j - 1]);
        v.increment_ratios.push_back(rho);
        rising = rho >= 1.0 - 1e-9 ? rising + 1 : 0;
      }
      // Measured against the first octave so that constant factors in the
      // integrand (weight shifts) cannot change the outcome.
      if (log_ref > -kInf && log_total > log_cap + log_ref) {
        v.state = IntegralState::Divergent;
        v.diagnostic = "partial integral exceeds 1e12 times the first octave at R = " + format_number(v.partial_values.back().radius);
        return v;
      }
      if (rising >= 8) {
        v.state = IntegralState::Divergent;
        v.diagnostic = "octave increments non-decreasing over 8 consecutive octaves (rho -> " +
                       format_number(v.increment_ratios.back()) + ")";
        return v;
      }
      const std::size_t n = v.increment_ratios.size();
      if (j + 1 >= 6 && n >= 4) {
        const auto last = v.increment_ratios.end() - 4;
        const double rmax = *std::max_element(last, v.increment_ratios.end());
        const double rmin = *std::min_element(last, v.increment_ratios.end());
        if (rmax < 0.9) {
          const double total = std::exp(log_total);
          const double inc = std::exp(log_inc.back());
          const double tail_hi = geometric_tail(inc, rmax);
          const double tail_lo = geometric_tail(inc, rmin);
          const double rho = v.increment_ratios.back();
          const double tail_mid = geometric_tail(inc, rho);
          if (tail_hi < 1e-6 * total) {
            v.state = IntegralState::Convergent;
            v.tail_estimate = tail_mid;
            v.limit = total + tail_mid;
            v.diagnostic = "increment ratio " + format_number(rho) + " < 0.9, geometric tail below 1e-6 of I";
            return v;
          }
          // At the octave cap, exactly geometric increments (power laws)
          // still extrapolate reliably.
          if (j + 1 == opts.max_octaves && tail_hi - tail_lo < 1e-6 * total) {
            v.state = IntegralState::Convergent;
            v.extrapolated = true;
            v.tail_estimate = tail_mid;
            v.limit = total + tail_mid;
            v.diagnostic = "stable increment ratio " + format_number(rho) +
                           "; geometric tail extrapolated with spread below 1e-6 of I";
            return v;
          }
        }
      }
    }
  } catch (const Error& e) {
    v.state = IntegralState::Inconclusive;
    v.diagnostic = std::string("integrand evaluation failed: ") + e.what();
    return v;
  }
  v.state = IntegralState::Inconclusive;
  v.diagnostic = "no decision within " + std::to_string(opts.max_octaves) + " octaves" +
                 (v.increment_ratios.empty() ? std::string{}
                                             : " (last rho " + format_number(v.increment_ratios.back()) + ")");
  return v;
}

IntegrabilityVerdict classify_integral_plain(const std::function<double(double)>& integrand, double origin,
                                             TailKind tail, std::string name) {
  auto fn = [&](double t) {
    const double h = 1e-6 * t;
    const double lp = std::log(integrand(t + h)), lm = std::log(integrand(t - h));
    const double value = integrand(t);
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("integrand must be positive and finite");
    return Jet2{std::log(value), (lp - lm) / (2 * h), 0.0};
  };
  ClassifyOptions opts;
  opts.origin = origin;
  return classify_integral(fn, tail, opts, std::move(name));
}

double log_head_integral(const ModelManifold& M, double t, std::optional<double> exponent) {
  auto density = [&](double s) { return M.log_density_jet(s, exponent); };
  return M.log_density_jet(t, exponent).value + log_head_ratio(density, t);
}

ClassificationReport stochastic_completeness(const ModelManifold& M, const CriterionOptions& opts) {
  ClassificationReport rep;
  rep.property = Property::StochasticCompleteness;
  rep.exponent = opts.exponent;
  if (opts.exponent) rep.criterion += " (comparison mode)";
  auto density = [&](double s) { return M.log_density_jet(s, opts.exponent); };
  // (integral_0^t a)/a(t), whose integral over (0, inf) is u*.
  auto head = [&](double t) {
    const double h = log_head_ratio(density, t);
    return Jet2{h, std::exp(-h) - density(t).d1, 0.0};
  };
  IntegrabilityVerdict main = classify_integral(head, TailKind::AtInfinity, {}, "head_ratio");
  rep.evidence.push_back(main);
  rep.evidence.push_back(volume_growth_sc_test(M));
  const auto& vol = rep.evidence.back();
  switch (main.state) {
    case IntegralState::Divergent:
      rep.verdict = Answer::Yes;
      rep.rule_fired = "head_ratio_divergent";
      break;
    case IntegralState::Convergent: {
      rep.verdict = Answer::No;
      rep.rule_fired = "head_ratio_convergent";
      auto log_f = [&](double t) { return log_head_ratio(density, t); };
      const double inner = std::exp(log_integrate(log_f, 0.0, 1.0, 1e-10).log_value);
      rep.u_star = inner + *main.limit;
      if (vol.state == IntegralState::Divergent) {
        rep.verdict = Answer::Unknown;
        rep.rule_fired = "contradiction";
        rep.diagnostic = "volume test implies completeness but the criterion integral converges";
      }
      break;
    }
    case IntegralState::Inconclusive:
      rep.verdict = Answer::Unknown;
      rep.rule_fired = "inconclusive";
      break;
  }
  return rep;
}

ClassificationReport feller(const ModelManifold& M, const CriterionOptions& opts) {
  ClassificationReport rep;
  rep.property = Property::Feller;
  rep.exponent = opts.exponent;
  if (opts.exponent) rep.criterion += " (comparison mode)";
  auto density = [&](double s) { return M.log_density_jet(s, opts.exponent); };
  auto inverse = [&](double t) {
    const Jet2 d = density(t);
    return Jet2{-d.value, -d.d1, 0.0};
  };
  const auto v1 = classify_integral(inverse, TailKind::AtInfinity, {}, "inverse_density");
  rep.evidence.push_back(v1);
  if (v1.state == IntegralState::Convergent) {
    rep.verdict = Answer::Yes;
    rep.rule_fired = "model1";
    return rep;
  }
  if (v1.state == IntegralState::Inconclusive) {
    rep.verdict = Answer::Unknown;
    rep.rule_fired = "inconclusive";
    return rep;
  }
  const auto vol = classify_integral(density, TailKind::AtInfinity, {}, "density");
  rep.evidence.push_back(vol);
  if (vol.state == IntegralState::Divergent) {
    // Infinite tails make the tail ratio identically +inf, so model2(b) holds.
    rep.verdict = Answer::Yes;
    rep.rule_fired = "model2";
    rep.diagnostic = "integral of a diverges; tail ratio is not integrable";
    return rep;
  }
  if (vol.state == IntegralState::Inconclusive) {
    rep.verdict = Answer::Unknown;
    rep.rule_fired = "inconclusive";
    return rep;
  }
  auto tail = [&](double t) {
    const double h = log_tail_ratio(density, t);
    if (!std::isfinite(h)) throw Error(ErrorKind::Quadrature, "tail integral of a did not converge");
    return Jet2{h, -std::exp(-h) - density(t).d1, 0.0};
  };
  const auto v2 = classify_integral(tail, TailKind::AtInfinity, {}, "tail_ratio");
  rep.evidence.push_back(v2);
  switch (v2.state) {
    case IntegralState::Divergent:
      rep.verdict = Answer::Yes;
      rep.rule_fired = "model2";
      break;
    case IntegralState::Convergent:
      rep.verdict = Answer::No;
      rep.rule_fired = "negation";
      break;
    case IntegralState::Inconclusive:
      rep.verdict = Answer::Unknown;
      rep.rule_fired = "inconclusive";
      break;
  }
  return rep;
}

IntegrabilityVerdict volume_growth_sc_test(const ModelManifold& M) {
  const double log_omega = std::log(M.sphere_area());
  auto density = [&](double s) { return M.log_density_jet(s); };
  // log vol and the ratio a/vol at R.
  auto log_vol = [&](double R, double* a_over_vol) {
    const double h = log_head_ratio(density, R);
    if (a_over_vol) *a_over_vol = std::exp(-h);
    return log_omega + density(R).value + h;
  };
  double R0 = 0.0;
  try {
    for (int k = 0; k <= 30; ++k) {
      const double R = std::ldexp(1.0, k);
      if (log_vol(R, nullptr) > 1.0) {
        R0 = R;
        break;
      }
    }
  } catch (const Error& e) {
    IntegrabilityVerdict v;
    v.name = "volume_growth";
    v.diagnostic = std::string("volume evaluation failed: ") + e.what();
    return v;
  }
  if (R0 == 0.0) {
    IntegrabilityVerdict v;
    v.name = "volume_growth";
    v.diagnostic = "vol_f(B_R) stays below e up to R = 2^30; test vacuous";
    return v;
  }
  auto integrand = [&](double R) {
    double ratio = 0.0;
    const double L = log_vol(R, &ratio);
    return Jet2{std::log(R) - std::log(L), 1.0 / R - ratio / L, 0.0};
  };
  ClassifyOptions opts;
  opts.origin = R0;
  return classify_integral(integrand, TailKind::AtInfinity, opts, "volume_growth");
}

BrooksResult brooks_bound(const ModelManifold& M) {
  BrooksResult out;
  auto density = [&](double s) { return M.log_density_jet(s); };
  const auto vol = classify_integral(density, TailKind::AtInfinity, {}, "density");
  if (vol.state == IntegralState::Inconclusive) {
    out.unbounded = false;
    out.value = kInf;
    out.diagnostic = "volume finiteness undecided: " + vol.diagnostic;
    return out;
  }
  out.finite_volume = vol.state == IntegralState::Convergent;
  const double log_omega = std::log(M.sphere_area());
  std::vector<double> Rs, ys;
  for (int j = 0; j <= 12; ++j) {
    const double R = std::ldexp(1.0, j);
    double y;
    if (out.finite_volume)
      y = -(log_omega + density(R).value + log_tail_ratio(density, R));
    else
      y = log_omega + density(R).value + log_head_ratio(density, R);
    Rs.push_back(R);
    ys.push_back(y);
    out.samples.emplace_back(R, y / R);
  }
  const std::size_t n = out.samples.size();
  int growing = 0;
  for (std::size_t i = n - 4; i < n; ++i) {
    const double q0 = out.samples[i - 1].second, q1 = out.samples[i].second;
    if (q0 > 0 && q1 >= 1.2 * q0) ++growing;
  }
  if (growing == 4) {
    out.unbounded = true;
    out.value = kInf;
    out.diagnostic = "quantity/R grows by at least 20% per doubling of R";
    return out;
  }
  // Fit y = c R + d log R + e on the outer radii; c is the limsup of y/R.
  const int first = 5;
  const int rows = static_cast<int>(n) - first;
  Eigen::MatrixXd A(rows, 3);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    const double R = Rs[first + i];
    A(i, 0) = R / Rs.back();
    A(i, 1) = std::log(R);
    A(i, 2) = 1.0;
    b(i) = ys[first + i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  const double c = coef(0) / Rs.back();
  out.value = std::max(0.0, c);
  out.diagnostic = std::string(out.finite_volume ? "finite volume: -log(vol_f(M) - vol_f(B_R))/R"
                                                 : "infinite volume: log vol_f(B_R)/R") +
                   "; fitted slope " + format_number(c);
  return out;
}

}  // namespace wml
