#include "wml/soliton.hpp"

#include <algorithm>
#include <cmath>

#include "wml/spectral.hpp"

namespace wml {

SolitonAudit audit_soliton(const SolitonPreset& p, const std::string& name) {
  const ModelManifold& M = p.base;
  const double lambda = p.soliton_constant;
  const double m = M.dimension();
  SolitonAudit a;
  a.name = name.empty() ? M.label() : name;
  a.soliton_constant = lambda;

  std::vector<double> grid;
  for (int j = 0; j <= 600; ++j) grid.push_back(1e-3 * std::pow(1e6, j / 600.0));

  double basic_lo = kInfinity, basic_hi = -kInfinity, s_inf = kInfinity;
  double ric_min = kInfinity, c_fit = 0.0;
  for (double r : grid) {
    const Jet2 S = p.scalar_curvature.jet(r);
    const Jet2 f = M.weight().jet(r);
    const double basic = S.value + f.d1 * f.d1 - 2.0 * lambda * f.value;
    basic_lo = std::min(basic_lo, basic);
    basic_hi = std::max(basic_hi, basic);
    const double lap = S.d2 + M.drift(r) * S.d1;
    a.scalar_eq_residual =
        std::max(a.scalar_eq_residual, std::abs(0.5 * lap - lambda * S.value + p.ricci_norm_squared(r)));
    const double floor = lambda >= 0.0 ? 0.0 : m * lambda;
    if (S.value < floor - 1e-12) a.scalar_lower_bound_ok = false;
    s_inf = std::min(s_inf, S.value);
    a.gradient_b = std::max(a.gradient_b, std::abs(f.d1) - std::abs(lambda) * r);
    ric_min = std::min(ric_min, M.ricci_f(r).min());
    c_fit = std::max(c_fit, std::abs(f.d1) / (r + 1.0));
  }
  // Relative to the size of the terms, which reach lambda^2 r^2 ~ 1e6.
  a.basic_eq_residual = (basic_hi - basic_lo) / std::max(1.0, std::abs(basic_hi) + lambda * lambda * 1e6);
  a.gradient_b = std::max(0.0, a.gradient_b);

  // Slope of |f'| against r over the last decade.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (double r : grid) {
    if (r < 100.0) continue;
    const double y = std::abs(M.weight().jet(r).d1);
    sx += r, sy += y, sxx += r * r, sxy += r * y, n += 1;
  }
  a.gradient_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  a.gradient_ok = a.gradient_slope <= std::abs(lambda) + 1e-9;

  a.volume_finite = brooks_bound(M).finite_volume;
  a.volume_ok = lambda <= 0.0 || a.volume_finite;

  a.sc = stochastic_completeness(M).verdict;
  a.feller = feller(M).verdict;

  const auto ess = ess_spectrum_bottom(M);
  a.ess_bottom = ess.bottom_estimate;
  a.scal2_lower = (s_inf - m * lambda) / m;
  a.scal2_ok = !ess.bottom_estimate || a.scal2_lower <= *ess.bottom_estimate + 1e-6;

  // Qian (iii) at p = o: Ric_f >= -k, |f'| <= C (r + 1).
  a.qian_k = std::max(0.0, -ric_min);
  a.qian_C = c_fit;
  for (double r : grid) {
    const double bound = qian_drift_bound_III(a.qian_k, a.qian_C, 0.0, M.dimension(), r).value;
    if (M.drift(r) > bound * (1.0 + 1e-12) + 1e-12) a.qian3_ok = false;
  }

  auto need = [&](bool ok, const char* what) {
    if (!ok) a.failures.emplace_back(what);
  };
  need(a.basic_eq_residual < 1e-8, "basic equation residual");
  need(a.scalar_eq_residual < 1e-8, "scalar curvature equation residual");
  need(a.scalar_lower_bound_ok, "scalar curvature lower bound");
  need(a.gradient_ok, "gradient growth");
  need(a.volume_ok, "finite weighted volume");
  need(a.sc == Answer::Yes, "stochastic completeness");
  need(a.feller == Answer::Yes, "Feller property");
  need(a.scal2_ok, "scalar curvature spectral estimate");
  need(a.qian3_ok, "drift comparison (iii)");
  a.all_pass = a.failures.empty();
  return a;
}

}  // namespace wml
