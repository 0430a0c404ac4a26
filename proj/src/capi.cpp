#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <algorithm>
#include <new>
#include <set>
#include <string>

#include "wml/error.hpp"
#include "wml/reproduce.hpp"
#include "wml/wml.h"

struct wml_manifold {
  wml::ModelManifold model;
  wml::Json source;
};

namespace {

using wml::Json;

thread_local std::string g_last_error;

wml_status status_of(wml::ErrorKind k) {
  using wml::ErrorKind;
  switch (k) {
    case ErrorKind::Syntax: return WML_E_SYNTAX;
    case ErrorKind::UnknownIdentifier: return WML_E_UNKNOWN_IDENTIFIER;
    case ErrorKind::Domain: return WML_E_DOMAIN;
    case ErrorKind::Validation: return WML_E_VALIDATION;
    case ErrorKind::Overflow: return WML_E_OVERFLOW;
    case ErrorKind::Quadrature: return WML_E_QUADRATURE;
    case ErrorKind::NoConvergence: return WML_E_NO_CONVERGENCE;
    case ErrorKind::Shooting: return WML_E_SHOOTING;
    case ErrorKind::StepUnderflow: return WML_E_STEP_UNDERFLOW;
    case ErrorKind::UnknownPreset: return WML_E_UNKNOWN_PRESET;
    case ErrorKind::Usage: return WML_E_USAGE;
  }
  return WML_E_INTERNAL;
}

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
wml_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return WML_OK;
  } catch (const wml::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const IoError& e) {
    g_last_error = e.what();
    return WML_E_IO;
  } catch (const Json::exception& e) {
    g_last_error = std::string("malformed request: ") + e.what();
    return WML_E_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return WML_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WML_E_INTERNAL;
  }
}

wml_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return WML_E_NULL_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Request object with defaults; keys that are never read are rejected.
class Request {
 public:
  explicit Request(const char* text) : j_(text ? Json::parse(text) : Json::object()) {
    if (!j_.is_object()) throw wml::Error(wml::ErrorKind::Usage, "request must be a JSON object");
  }
  explicit Request(Json j) : j_(std::move(j)) {
    if (!j_.is_object()) throw wml::Error(wml::ErrorKind::Usage, "request must be a JSON object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? wml::number_from_json(j_[key]) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? j_[key].get<std::string>() : fallback;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& v : j_[key]) out.push_back(wml::number_from_json(v));
    return out;
  }
  Json raw(const std::string& key) {
    used_.insert(key);
    return j_.value(key, Json());
  }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw wml::Error(wml::ErrorKind::Usage, "unknown request key '" + k + "'");
  }
  const Json& json() const { return j_; }

 private:
  Json j_;
  std::set<std::string> used_;
};

struct Response {
  std::string outcome = "ok";
  Json results = Json::object();
  std::vector<std::string> warnings;
  Json runtime = Json::object();
  Json artifacts = Json::object();

  std::string dump() const {
    return Json{{"outcome", outcome},
                {"results", results},
                {"warnings", warnings},
                {"runtime", runtime},
                {"artifacts", artifacts}}
        .dump();
  }
};

double positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw wml::ValidationError(std::string(what) + " must be positive and finite");
  return v;
}

std::size_t count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) throw wml::ValidationError(std::string(what) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

Json classify_results(const wml::ModelManifold& M, Request& req, Response& resp) {
  wml::CriterionOptions opts;
  if (req.has("exponent")) opts.exponent = req.number("exponent", 0.0);
  req.finish();
  const auto sc = wml::stochastic_completeness(M, opts);
  const auto fe = wml::feller(M, opts);
  if (sc.verdict == wml::Answer::Unknown) resp.warnings.push_back("stochastic completeness inconclusive: " + sc.diagnostic);
  if (fe.verdict == wml::Answer::Unknown) resp.warnings.push_back("Feller property inconclusive: " + fe.diagnostic);
  if (sc.verdict == wml::Answer::Unknown && fe.verdict == wml::Answer::Unknown) resp.outcome = "inconclusive";
  const auto vol = wml::volume_growth_sc_test(M);
  const auto brooks = wml::brooks_bound(M);
  return Json{{"verdicts", Json{{"SC", wml::to_string(sc.verdict)}, {"Feller", wml::to_string(fe.verdict)}}},
              {"stochastic_completeness", wml::to_json(sc)},
              {"feller", wml::to_json(fe)},
              {"volume_growth", wml::to_json(vol)},
              {"brooks", wml::to_json(brooks)}};
}

Json spectrum_results(const wml::ModelManifold& M, Request& req, Response& resp) {
  const std::string mode = req.text("mode", "ball");
  if (mode == "ball" || mode == "interval") {
    double lo = 0.0, hi = 0.0;
    if (mode == "ball") {
      hi = positive(req.number("radius", 1.0), "radius");
    } else {
      lo = req.number("r_lo", 0.0);
      hi = req.number("r_hi", 1.0);
      if (!(lo >= 0.0 && hi > lo && std::isfinite(hi))) throw wml::ValidationError("need 0 <= r_lo < r_hi < inf");
    }
    req.finish();
    const auto e = wml::lambda1_interval(M, lo, hi);
    if (e.cross_check && std::abs(*e.cross_check - e.lambda1) > std::max(1e-6, 1e-4 * e.lambda1))
      resp.warnings.push_back("shooting and finite differences disagree");
    Json out{{"mode", mode}, {"r_lo", wml::number_json(lo)}, {"r_hi", wml::number_json(hi)},
             {"lambda1", wml::number_json(e.lambda1)}, {"eigen", wml::to_json(e)}};
    if (mode == "ball") {
      const auto [alpha, beta] = wml::cheng_constants(M, hi);
      out["cheng_upper_bound"] = wml::to_json(wml::cheng_upper_bound(alpha, beta, M.dimension(), hi));
    }
    return out;
  }
  if (mode == "exterior") {
    const double R = positive(req.number("radius", 1.0), "radius");
    req.finish();
    const auto e = wml::lambda1_exterior(M, R);
    const auto bound = wml::half_drift_squared_bound(M, R);
    Json table = Json::array();
    for (const auto& [r, l] : e.history) table.push_back(Json::array({wml::number_json(r), wml::number_json(l)}));
    resp.artifacts["table"] = Json{{"columns", Json::array({"R_outer", "lambda1"})}, {"rows", table}};
    return Json{{"mode", mode},
                {"radius", wml::number_json(R)},
                {"lambda1", wml::number_json(e.lambda1)},
                {"eigen", wml::to_json(e)},
                {"half_drift_squared_bound", wml::to_json(bound)}};
  }
  if (mode == "ess") {
    auto radii = req.numbers("radii", {1.0, 2.0, 4.0, 8.0});
    req.finish();
    if (radii.size() < 2) throw wml::ValidationError("ess needs at least two radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      positive(radii[i], "radius");
      if (i > 0 && !(radii[i] > radii[i - 1])) throw wml::ValidationError("ess radii must increase");
    }
    const auto ess = wml::ess_spectrum_bottom(M, radii);
    const auto brooks = wml::brooks_vs_ess(M, ess);
    if (!ess.monotone_ok) resp.warnings.push_back("exterior eigenvalues are not monotone in R");
    if (!brooks.consistent) resp.warnings.push_back("essential spectrum bottom exceeds the volume-growth bound");
    Json table = Json::array();
    Json bounds = Json::array();
    for (const auto& e : ess.exterior) {
      const auto b = wml::half_drift_squared_bound(M, e.r_lo);
      table.push_back(Json::array({wml::number_json(e.r_lo), wml::number_json(e.lambda1)}));
      bounds.push_back(wml::to_json(b));
    }
    resp.artifacts["table"] = Json{{"columns", Json::array({"R", "lambda1"})}, {"rows", table}};
    return Json{{"mode", mode},
                {"bottom", ess.bottom_estimate ? wml::number_json(*ess.bottom_estimate) : Json()},
                {"unbounded", ess.unbounded},
                {"ess", wml::to_json(ess)},
                {"half_drift_squared_bounds", bounds},
                {"brooks", wml::to_json(brooks)}};
  }
  throw wml::Error(wml::ErrorKind::Usage, "unknown spectrum mode '" + mode + "'");
}

Json simulate_results(const wml::ModelManifold& M, Request& req, Response& resp) {
  wml::SimConfig cfg;
  cfg.n_paths = count(req.number("paths", static_cast<double>(cfg.n_paths)), "paths");
  cfg.t_max = req.number("t_max", cfg.t_max);
  cfg.seed = static_cast<std::uint64_t>(count(req.number("seed", static_cast<double>(cfg.seed)), "seed"));
  cfg.dt_base = req.number("dt", cfg.dt_base);
  cfg.r_absorb_outer = req.number("outer", cfg.r_absorb_outer);
  cfg.r_reflect_inner = req.number("inner", cfg.r_reflect_inner);
  cfg.threads = static_cast<int>(count(req.number("threads", 0.0), "threads"));
  cfg.trace_paths = count(req.number("trace_paths", 0.0), "trace_paths");
  const double r0 = req.number("r0", 1.0);
  const Json hitting = req.raw("hitting");
  req.finish();
  wml::validate(cfg);

  Json out{{"config", wml::to_json(cfg)}};
  wml::SimReport rep;
  if (!hitting.is_null()) {
    Request h(hitting);
    const double R0 = positive(h.number("radius", 1.0), "hitting radius");
    const double lambda = positive(h.number("lambda", 1.0), "lambda");
    const auto starts = h.numbers("starts", {r0});
    h.finish();
    rep = wml::hitting_laplace(M, starts, R0, lambda, cfg);
    out["mode"] = "hitting";
    out["hitting_radius"] = wml::number_json(R0);
    out["lambda"] = wml::number_json(lambda);
  } else {
    rep = wml::simulate_explosion(M, r0, cfg);
    out["mode"] = "explosion";
    out["r0"] = wml::number_json(r0);
  }
  const Json rep_json = wml::to_json(rep);
  for (const auto& [k, v] : rep_json.items()) out[k] = v;
  if (!rep.dt_stable) resp.warnings.push_back("estimate moved under step halving beyond the statistical band");
  if (rep.underflow_paths > 0)
    resp.warnings.push_back(std::to_string(rep.underflow_paths) + " paths hit the step-size floor");
  resp.runtime["threads"] = rep.threads_used;
  if (!rep.trace.empty()) {
    Json rows = Json::array();
    for (const auto& p : rep.trace) rows.push_back(Json::array({p.path, p.t, p.r}));
    resp.artifacts["trace"] = Json{{"columns", Json::array({"path", "t", "r"})}, {"rows", rows}};
  }
  return out;
}

Json profile_results(const wml::ModelManifold& M, Request& req, Response& resp) {
  const double lambda = positive(req.number("lambda", 1.0), "lambda");
  const double R0 = positive(req.number("radius", 1.0), "radius");
  wml::ExteriorOptions opts;
  opts.r_eval_max = req.number("r_max", std::max(20.0, 4.0 * R0));
  req.finish();
  if (!(opts.r_eval_max > R0)) throw wml::ValidationError("r_max must exceed the radius");
  const auto h = wml::minimal_exterior_solution(M, lambda, R0, opts);
  if (!h.converged) {
    resp.warnings.push_back("exhaustion did not converge");
    resp.outcome = "inconclusive";
  }
  Json rows = Json::array();
  for (std::size_t i = 0; i < h.size(); ++i)
    rows.push_back(Json::array({wml::number_json(h.grid[i]), wml::number_json(h.values[i]),
                                wml::number_json(h.derivative_values[i])}));
  resp.artifacts["table"] = Json{{"columns", Json::array({"r", "h", "dh"})}, {"rows", rows}};
  return Json{{"lambda", wml::number_json(lambda)}, {"radius", wml::number_json(R0)}, {"profile", wml::to_json(h)}};
}

Json heat_results(const wml::ModelManifold& M, Request& req, Response& resp) {
  const double r_init = positive(req.number("r_init", 1.0), "r_init");
  const double T = req.number("t", 1.0);
  const double R = positive(req.number("truncation", 4.0), "truncation");
  const int doublings = static_cast<int>(count(req.number("max_doublings", 4.0), "max_doublings"));
  req.finish();
  if (!(T >= 0.0 && std::isfinite(T))) throw wml::ValidationError("t must be non-negative");
  if (!(R > r_init)) throw wml::ValidationError("truncation radius must exceed r_init");
  const auto s = wml::heat_mass_doubling(M, r_init, T, R, doublings);
  if (!s.stabilized) {
    resp.warnings.push_back("defect still moves under truncation doubling");
    resp.outcome = "inconclusive";
  }
  const auto& last = s.curves.back();
  Json rows = Json::array();
  for (std::size_t i = 0; i < last.times.size(); ++i)
    rows.push_back(Json::array({wml::number_json(last.times[i]), wml::number_json(last.mass[i])}));
  resp.artifacts["table"] = Json{{"columns", Json::array({"t", "mass"})}, {"rows", rows}};
  return Json{{"r_init", wml::number_json(r_init)}, {"t", wml::number_json(T)}, {"study", wml::to_json(s)}};
}

template <class F>
wml_status run(const wml_manifold* m, const char* request, char** json_out, F&& fn) {
  if (!m) return null_argument("manifold");
  if (!json_out) return null_argument("json_out");
  return guarded([&] {
    Request req(request);
    Response resp;
    resp.results = fn(m->model, req, resp);
    *json_out = dup_string(resp.dump());
  });
}

wml_status make_manifold(wml_manifold** out, wml::ModelManifold model, Json source) {
  *out = new wml_manifold{std::move(model), std::move(source)};
  return WML_OK;
}

}  // namespace

extern "C" {

const char* wml_version(void) { return wml::kToolVersion; }
const char* wml_schema_version(void) { return wml::kSchemaVersion; }

const char* wml_status_name(wml_status status) {
  switch (status) {
    case WML_OK: return "ok";
    case WML_E_SYNTAX: return "syntax error";
    case WML_E_UNKNOWN_IDENTIFIER: return "unknown identifier";
    case WML_E_DOMAIN: return "domain error";
    case WML_E_VALIDATION: return "validation error";
    case WML_E_OVERFLOW: return "overflow";
    case WML_E_QUADRATURE: return "quadrature failure";
    case WML_E_NO_CONVERGENCE: return "no convergence";
    case WML_E_SHOOTING: return "shooting failure";
    case WML_E_STEP_UNDERFLOW: return "step underflow";
    case WML_E_UNKNOWN_PRESET: return "unknown preset";
    case WML_E_USAGE: return "usage error";
    case WML_E_IO: return "i/o error";
    case WML_E_NULL_ARGUMENT: return "null argument";
    case WML_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* wml_last_error(void) { return g_last_error.c_str(); }

void wml_string_free(char* s) { std::free(s); }

wml_status wml_manifold_from_preset(const char* name, wml_manifold** out) {
  if (!name) return null_argument("name");
  if (!out) return null_argument("out");
  return guarded([&] { make_manifold(out, wml::preset(name), Json{{"kind", "preset"}, {"name", name}}); });
}

wml_status wml_manifold_from_spec(const char* text, wml_manifold** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { make_manifold(out, wml::load_manifold_text(text), Json{{"kind", "spec"}, {"text", text}}); });
}

wml_status wml_manifold_from_file(const char* path, wml_manifold** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot read '") + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    make_manifold(out, wml::load_manifold_text(text), Json{{"kind", "file"}, {"path", path}});
  });
}

void wml_manifold_free(wml_manifold* m) { delete m; }

wml_status wml_manifold_describe(const wml_manifold* m, char** json_out) {
  if (!m) return null_argument("manifold");
  if (!json_out) return null_argument("json_out");
  return guarded([&] {
    Json j{{"source", m->source}};
    const Json model = wml::to_json(m->model);
    for (const auto& [k, v] : model.items()) j[k] = v;
    *json_out = dup_string(j.dump());
  });
}

wml_status wml_manifold_dimension(const wml_manifold* m, int* out) {
  if (!m) return null_argument("manifold");
  if (!out) return null_argument("out");
  *out = m->model.dimension();
  return WML_OK;
}

wml_status wml_manifold_drift(const wml_manifold* m, double r, double* out) {
  if (!m) return null_argument("manifold");
  if (!out) return null_argument("out");
  return guarded([&] { *out = m->model.drift(r); });
}

wml_status wml_preset_catalog(char** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    std::string s;
    for (const auto& n : wml::preset_catalog()) s += n + "\n";
    *out = dup_string(s);
  });
}

wml_status wml_classify(const wml_manifold* m, const char* request_json, char** json_out) {
  return run(m, request_json, json_out, classify_results);
}

wml_status wml_spectrum(const wml_manifold* m, const char* request_json, char** json_out) {
  return run(m, request_json, json_out, spectrum_results);
}

wml_status wml_lambda1_ball(const wml_manifold* m, double radius, double* out) {
  if (!m) return null_argument("manifold");
  if (!out) return null_argument("out");
  return guarded([&] { *out = wml::lambda1_interval(m->model, 0.0, positive(radius, "radius")).lambda1; });
}

wml_status wml_simulate(const wml_manifold* m, const char* request_json, char** json_out) {
  return run(m, request_json, json_out, simulate_results);
}

wml_status wml_profile(const wml_manifold* m, const char* request_json, char** json_out) {
  return run(m, request_json, json_out, profile_results);
}

wml_status wml_heat(const wml_manifold* m, const char* request_json, char** json_out) {
  return run(m, request_json, json_out, heat_results);
}

wml_status wml_audit(const char* soliton_preset, char** json_out) {
  if (!soliton_preset) return null_argument("soliton_preset");
  if (!json_out) return null_argument("json_out");
  return guarded([&] {
    Response resp;
    const auto a = wml::audit_soliton(wml::soliton_preset(soliton_preset), soliton_preset);
    for (const auto& f : a.failures) resp.warnings.push_back("audit flag failed: " + f);
    resp.results = Json{{"soliton_audit", wml::to_json(a)}};
    resp.artifacts["manifold"] = wml::to_json(wml::soliton_preset(soliton_preset).base);
    *json_out = dup_string(resp.dump());
  });
}

wml_status wml_reproduce(const char* example_id, char** json_out) {
  if (!example_id) return null_argument("example_id");
  if (!json_out) return null_argument("json_out");
  return guarded([&] {
    const std::string id = example_id;
    std::vector<std::string> ids = id == "all" ? wml::reproduction_ids() : std::vector<std::string>{id};
    if (id != "all") {
      const auto known = wml::reproduction_ids();
      if (std::find(known.begin(), known.end(), id) == known.end())
        throw wml::Error(wml::ErrorKind::UnknownIdentifier, "unknown example '" + id + "'");
    }
    Response resp;
    Json examples = Json::array();
    bool all = true;
    for (const auto& x : ids) {
      const auto r = wml::reproduce(x);
      all = all && r.all_pass();
      for (const auto& row : r.rows)
        if (!row.pass) resp.warnings.push_back(x + ": cell '" + row.label + "' failed");
      examples.push_back(r.to_json());
    }
    resp.outcome = all ? "ok" : "mismatch";
    resp.results = Json{{"all_pass", all}, {"examples", examples}};
    *json_out = dup_string(resp.dump());
  });
}

wml_status wml_reproduction_ids(char** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    std::string s;
    for (const auto& n : wml::reproduction_ids()) s += n + "\n";
    *out = dup_string(s);
  });
}

}  // extern "C"
