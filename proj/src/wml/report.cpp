#include "wml/report.hpp"

#include <cmath>
#include <limits>

#include "wml/error.hpp"

namespace wml {

Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError("expected a number, \"inf\", \"-inf\" or \"nan\"");
}

namespace {

template <class T>
Json optional_number(const std::optional<T>& v) {
  return v ? number_json(*v) : Json(nullptr);
}

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_json(x));
  return out;
}

Json pairs(const std::vector<std::pair<double, double>>& v) {
  Json out = Json::array();
  for (const auto& [a, b] : v) out.push_back(Json::array({number_json(a), number_json(b)}));
  return out;
}

}  // namespace

Json to_json(const ModelManifold& M) {
  return Json{{"label", M.label()},
              {"dimension", M.dimension()},
              {"g", M.warp().canonical()},
              {"f", M.weight().canonical()}};
}

Json to_json(const IntegrabilityVerdict& v) {
  Json partial = Json::array();
  for (const auto& p : v.partial_values)
    partial.push_back(Json{{"radius", number_json(p.radius)}, {"log_integral", number_json(p.log_integral)}});
  return Json{{"name", v.name},
              {"state", to_string(v.state)},
              {"limit", optional_number(v.limit)},
              {"tail_estimate", optional_number(v.tail_estimate)},
              {"extrapolated", v.extrapolated},
              {"partial_values", partial},
              {"increment_ratios", numbers(v.increment_ratios)},
              {"diagnostic", v.diagnostic}};
}

Json to_json(const ClassificationReport& r) {
  Json evidence = Json::array();
  for (const auto& e : r.evidence) evidence.push_back(to_json(e));
  return Json{{"property", to_string(r.property)},
              {"verdict", to_string(r.verdict)},
              {"rule_fired", r.rule_fired},
              {"criterion", r.criterion},
              {"u_star", optional_number(r.u_star)},
              {"exponent", optional_number(r.exponent)},
              {"evidence", evidence},
              {"diagnostic", r.diagnostic}};
}

Json to_json(const BrooksResult& b) {
  return Json{{"finite_volume", b.finite_volume},
              {"unbounded", b.unbounded},
              {"value", number_json(b.value)},
              {"samples", pairs(b.samples)},
              {"diagnostic", b.diagnostic}};
}

Json to_json(const EigenResult& e) {
  return Json{{"lambda1", number_json(e.lambda1)},
              {"method", to_string(e.method)},
              {"r_lo", number_json(e.r_lo)},
              {"r_hi", number_json(e.r_hi)},
              {"mesh_nodes", e.mesh_nodes},
              {"residual", number_json(e.residual)},
              {"cross_check", optional_number(e.cross_check)},
              {"history", pairs(e.history)},
              {"converged", e.converged},
              {"diagnostic", e.diagnostic}};
}

Json to_json(const EssSpecReport& e) {
  Json ext = Json::array();
  for (const auto& x : e.exterior) ext.push_back(to_json(x));
  return Json{{"radii", numbers(e.radii)},
              {"exterior", ext},
              {"bottom_estimate", optional_number(e.bottom_estimate)},
              {"unbounded", e.unbounded},
              {"monotone_ok", e.monotone_ok},
              {"diagnostic", e.diagnostic}};
}

Json to_json(const BoundValue& b) {
  Json inputs = Json::object();
  for (const auto& [k, v] : b.inputs) inputs[k] = number_json(v);
  return Json{{"kind", to_string(b.kind)},
              {"status", to_string(b.status)},
              {"value", number_json(b.value)},
              {"inputs", inputs},
              {"note", b.note}};
}

Json to_json(const BrooksEssRecord& b) {
  return Json{{"ess_bottom", optional_number(b.ess_bottom)},
              {"brooks", optional_number(b.brooks)},
              {"skipped", b.skipped},
              {"consistent", b.consistent},
              {"note", b.note}};
}

Json to_json(const SimConfig& c) {
  return Json{{"n_paths", c.n_paths},
              {"t_max", number_json(c.t_max)},
              {"dt_base", number_json(c.dt_base)},
              {"r_absorb_outer", number_json(c.r_absorb_outer)},
              {"r_reflect_inner", number_json(c.r_reflect_inner)},
              {"seed", c.seed},
              {"dt_check", c.dt_check}};
}

Json to_json(const SimReport& r) {
  Json hits = Json::array();
  for (const auto& h : r.hitting_estimates)
    hits.push_back(Json{{"r_start", number_json(h.r_start)},
                        {"lambda", number_json(h.lambda)},
                        {"estimate", number_json(h.estimate)},
                        {"ci95", number_json(h.ci95)},
                        {"survived_fraction", number_json(h.survived_fraction)},
                        {"outward_fraction", number_json(h.outward_fraction)},
                        {"remainder_bound", number_json(h.remainder_bound)}});
  // threads_used and the trace stay out: the payload must not depend on the worker count.
  return Json{{"explosion_fraction", number_json(r.explosion_fraction)},
              {"ci95_halfwidth", number_json(r.ci95_halfwidth)},
              {"hitting_estimates", hits},
              {"n_effective", r.n_effective},
              {"underflow_paths", r.underflow_paths},
              {"total_steps", r.total_steps},
              {"dt_check",
               Json{{"paths", r.dt_check_paths},
                    {"full_step", number_json(r.dt_check_full)},
                    {"half_step", number_json(r.dt_check_half)},
                    {"stable", r.dt_stable}}},
              {"diagnostic", r.diagnostic}};
}

Json to_json(const RadialProfile& p) {
  return Json{{"grid", numbers(p.grid)},
              {"values", numbers(p.values)},
              {"derivatives", numbers(p.derivative_values)},
              {"boundary_conditions", p.bc_meta},
              {"converged", p.converged},
              {"history", numbers(p.history)},
              {"monotone_decreasing", p.monotone_decreasing}};
}

Json to_json(const MassStudy& s) {
  Json curves = Json::array();
  for (const auto& c : s.curves)
    curves.push_back(Json{{"truncation_radius", number_json(c.truncation_radius)},
                          {"final_mass", number_json(c.mass.back())},
                          {"outflow", number_json(c.leakage_estimate)},
                          {"conservation_error", number_json(c.conservation_error)},
                          {"times", numbers(c.times)},
                          {"mass", numbers(c.mass)}});
  return Json{{"defect", number_json(s.defect)},
              {"truncation_sensitivity", number_json(s.truncation_sensitivity)},
              {"stabilized", s.stabilized},
              {"curves", curves}};
}

Json to_json(const SolitonAudit& a) {
  return Json{{"name", a.name},
              {"soliton_constant", number_json(a.soliton_constant)},
              {"basic_eq_residual", number_json(a.basic_eq_residual)},
              {"scalar_eq_residual", number_json(a.scalar_eq_residual)},
              {"scalar_lower_bound_ok", a.scalar_lower_bound_ok},
              {"gradient_b", number_json(a.gradient_b)},
              {"gradient_slope", number_json(a.gradient_slope)},
              {"gradient_ok", a.gradient_ok},
              {"volume_finite", a.volume_finite},
              {"volume_ok", a.volume_ok},
              {"stochastically_complete", to_string(a.sc)},
              {"feller", to_string(a.feller)},
              {"ess_bottom", optional_number(a.ess_bottom)},
              {"scal2_lower", number_json(a.scal2_lower)},
              {"scal2_ok", a.scal2_ok},
              {"qian_k", number_json(a.qian_k)},
              {"qian_C", number_json(a.qian_C)},
              {"qian3_ok", a.qian3_ok},
              {"all_pass", a.all_pass},
              {"failures", a.failures}};
}

}  // namespace wml
