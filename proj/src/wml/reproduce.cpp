#include "wml/reproduce.hpp"

#include <algorithm>
#include <cmath>

#include "wml/error.hpp"

namespace wml {

bool Reproduction::all_pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ReproRow& r) { return r.pass; });
}

Json Reproduction::to_json() const {
  Json table = Json::array();
  for (const auto& r : rows)
    table.push_back(Json{{"case", r.label},
                         {"expected", r.expected},
                         {"observed", r.observed},
                         {"pass", r.pass},
                         {"evidence", r.evidence}});
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const ReproRow& r) { return r.pass; });
  return Json{{"example", id},
              {"claim", claim},
              {"cells", rows.size()},
              {"passed", passed},
              {"all_pass", all_pass()},
              {"table", table}};
}

namespace {

const char* kAlphas[] = {"0.5", "1", "1.5", "2", "2.5", "3"};

Reproduction feller_alpha_table() {
  Reproduction out{"feller-alpha-table", "g = e^{-r^alpha} near infinity is Feller iff alpha <= 2", {}};
  for (const char* a : kAlphas) {
    const double alpha = std::stod(a);
    for (int m : {2, 3}) {
      const auto M = preset("exp-alpha-" + std::to_string(m) + "-" + a);
      const auto rep = feller(M);
      ReproRow row;
      row.label = std::string("alpha=") + a + " m=" + std::to_string(m);
      row.expected = alpha <= 2.0 ? "Yes" : "No";
      row.observed = to_string(rep.verdict);
      row.pass = row.observed == row.expected;
      row.evidence = Json{{"preset", M.label()}, {"rule_fired", rep.rule_fired}, {"diagnostic", rep.diagnostic}};
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

Reproduction stoch_incomplete_model() {
  Reproduction out{"stoch-incomplete-model",
                   "complete models conserve heat; g = r e^{r^3} is stochastically incomplete with finite u*",
                   {}};
  for (const char* name : {"euclidean-3", "hyperbolic-2", "gaussian-shrinker-3-1"}) {
    const auto rep = stochastic_completeness(preset(name));
    ReproRow row;
    row.label = std::string("classifier ") + name;
    row.expected = "Yes";
    row.observed = to_string(rep.verdict);
    row.pass = rep.verdict == Answer::Yes;
    row.evidence = Json{{"rule_fired", rep.rule_fired}};
    out.rows.push_back(std::move(row));
  }

  const auto M = preset("exp-growth-2");
  const auto sc = stochastic_completeness(M);
  {
    ReproRow row;
    row.label = "classifier exp-growth-2";
    row.expected = "No, finite u*";
    row.observed = to_string(sc.verdict);
    if (sc.u_star) row.observed += ", u* = " + format_number(*sc.u_star);
    row.pass = sc.verdict == Answer::No && sc.u_star && std::isfinite(*sc.u_star);
    row.evidence = Json{{"rule_fired", sc.rule_fired}, {"u_star", sc.u_star ? number_json(*sc.u_star) : Json()}};
    out.rows.push_back(std::move(row));
  }

  const auto heat = heat_mass_doubling(M, 1.0, 1.0, 4.0);
  {
    ReproRow row;
    row.label = "heat mass defect at T=1";
    row.expected = "> 0.05, stable under truncation doubling";
    row.observed = format_number(heat.defect);
    row.pass = heat.defect > 0.05 && heat.stabilized;
    row.evidence = Json{{"defect", number_json(heat.defect)},
                        {"truncation_sensitivity", number_json(heat.truncation_sensitivity)},
                        {"truncation_radius", number_json(heat.curves.back().truncation_radius)}};
    out.rows.push_back(std::move(row));
  }

  SimConfig cfg;
  cfg.n_paths = 10000;
  cfg.t_max = 1.0;
  cfg.seed = 7;
  std::vector<SimReport> sims;
  for (double outer : {50.0, 100.0}) {
    cfg.r_absorb_outer = outer;
    sims.push_back(simulate_explosion(M, 1.0, cfg));
    const auto& s = sims.back();
    ReproRow row;
    row.label = "explosion fraction, outer radius " + format_number(outer);
    row.expected = "> 0.05";
    row.observed = format_number(s.explosion_fraction) + " +/- " + format_number(s.ci95_halfwidth);
    row.pass = s.explosion_fraction > 0.05;
    row.evidence = Json{{"explosion_fraction", number_json(s.explosion_fraction)},
                        {"ci95_halfwidth", number_json(s.ci95_halfwidth)},
                        {"dt_stable", s.dt_stable}};
    out.rows.push_back(std::move(row));
  }
  {
    const double diff = std::abs(sims[0].explosion_fraction - sims[1].explosion_fraction);
    const double band = 2.0 * std::hypot(sims[0].ci95_halfwidth, sims[1].ci95_halfwidth) + 1.0 / cfg.n_paths;
    ReproRow row;
    row.label = "explosion fraction under outer-radius doubling";
    row.expected = "change <= " + format_number(band);
    row.observed = format_number(diff);
    row.pass = diff <= band;
    out.rows.push_back(std::move(row));
  }
  {
    const auto& s = sims.back();
    const double diff = std::abs(heat.defect - s.explosion_fraction);
    const double band = 2.0 * s.ci95_halfwidth + heat.truncation_sensitivity;
    ReproRow row;
    row.label = "heat defect against explosion fraction";
    row.expected = "difference <= 2 CI + leakage = " + format_number(band);
    row.observed = format_number(diff);
    row.pass = diff <= band;
    out.rows.push_back(std::move(row));
  }
  return out;
}

Reproduction discrete_spectrum_alpha() {
  Reproduction out{"discrete-spectrum-alpha",
                   "g = e^{-r^alpha} near infinity has discrete spectrum for every alpha > 1 (alpha <= 1 as controls)",
                   {}};
  for (const char* a : kAlphas) {
    const double alpha = std::stod(a);
    const auto M = preset(std::string("exp-alpha-2-") + a);
    const auto ess = ess_spectrum_bottom(M);
    Json radii = Json::array();
    bool above_bound = true, increasing = true;
    for (std::size_t i = 0; i < ess.exterior.size(); ++i) {
      const auto& e = ess.exterior[i];
      const auto bound = half_drift_squared_bound(M, e.r_lo);
      if (bound.status == BoundStatus::Ok && e.lambda1 < bound.value - 1e-6) above_bound = false;
      if (i > 0 && e.lambda1 <= ess.exterior[i - 1].lambda1) increasing = false;
      radii.push_back(Json{{"R", number_json(e.r_lo)},
                           {"lambda1_exterior", number_json(e.lambda1)},
                           {"half_drift_squared", number_json(bound.value)},
                           {"bound_status", to_string(bound.status)}});
    }
    ReproRow row;
    row.label = std::string("alpha=") + a + " m=2";
    const bool discrete_expected = alpha > 1.0;
    row.expected = discrete_expected ? "discrete" : "essential spectrum present";
    row.observed = ess.unbounded ? "discrete"
                                 : "essential spectrum from " + format_number(ess.bottom_estimate.value_or(0.0));
    row.pass = ess.unbounded == discrete_expected && above_bound && (!discrete_expected || increasing);
    row.evidence = Json{{"exterior", radii}, {"increasing", increasing}, {"above_bound", above_bound}};
    out.rows.push_back(std::move(row));
  }
  return out;
}

Reproduction soliton_audit_table() {
  Reproduction out{"soliton-audit",
                   "complete gradient Ricci solitons are stochastically complete and Feller for Delta_f and Delta",
                   {}};
  for (const char* name : {"gaussian-shrinker-2-0.5", "gaussian-shrinker-3-1", "steady-flat-3"}) {
    const auto p = soliton_preset(name);
    const auto audit = audit_soliton(p, name);
    ReproRow row;
    row.label = std::string(name) + " Delta_f";
    row.expected = "SC=Yes Feller=Yes, all audit flags";
    row.observed = std::string("SC=") + to_string(audit.sc) + " Feller=" + to_string(audit.feller) +
                   (audit.all_pass ? ", all audit flags" : ", failed: " + std::to_string(audit.failures.size()));
    row.pass = audit.all_pass && audit.sc == Answer::Yes && audit.feller == Answer::Yes;
    row.evidence = to_json(audit);
    out.rows.push_back(std::move(row));

    const ModelManifold plain(p.base.dimension(), p.base.warp(), parse_expr("0"), std::string(name) + "-unweighted");
    const auto sc = stochastic_completeness(plain);
    const auto fe = feller(plain);
    ReproRow row2;
    row2.label = std::string(name) + " Delta";
    row2.expected = "SC=Yes Feller=Yes";
    row2.observed = std::string("SC=") + to_string(sc.verdict) + " Feller=" + to_string(fe.verdict);
    row2.pass = sc.verdict == Answer::Yes && fe.verdict == Answer::Yes;
    out.rows.push_back(std::move(row2));
  }
  return out;
}

}  // namespace

std::vector<std::string> reproduction_ids() {
  return {"feller-alpha-table", "stoch-incomplete-model", "discrete-spectrum-alpha", "soliton-audit"};
}

Reproduction reproduce(const std::string& id) {
  if (id == "feller-alpha-table") return feller_alpha_table();
  if (id == "stoch-incomplete-model") return stoch_incomplete_model();
  if (id == "discrete-spectrum-alpha") return discrete_spectrum_alpha();
  if (id == "soliton-audit") return soliton_audit_table();
  throw Error(ErrorKind::UnknownIdentifier, "unknown example '" + id + "'");
}

}  // namespace wml
