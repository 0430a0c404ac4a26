// Command-line front end over the C API. Exit codes: 0 ok, 1 numerical
// failure, 2 usage or validation, 3 inconclusive only, 4 reproduction mismatch.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wml/wml.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitMismatch = 4;

struct ApiFailure {
  wml_status status;
  std::string message;
};

int exit_code_for(wml_status s) {
  switch (s) {
    case WML_OK: return kExitOk;
    case WML_E_SYNTAX:
    case WML_E_UNKNOWN_IDENTIFIER:
    case WML_E_DOMAIN:
    case WML_E_VALIDATION:
    case WML_E_UNKNOWN_PRESET:
    case WML_E_USAGE:
    case WML_E_IO:
    case WML_E_NULL_ARGUMENT: return kExitUsage;
    case WML_E_NO_CONVERGENCE: return kExitInconclusive;
    default: return kExitFailure;
  }
}

void check(wml_status s) {
  if (s != WML_OK) throw ApiFailure{s, wml_last_error()};
}

std::string take(char* s) {
  std::string out(s);
  wml_string_free(s);
  return out;
}

using ManifoldPtr = std::unique_ptr<wml_manifold, decltype(&wml_manifold_free)>;

struct ManifoldArgs {
  std::string file;
  std::string preset;
  std::string spec;

  void attach(CLI::App* cmd) {
    auto* g = cmd->add_option_group("manifold", "manifold source (exactly one)");
    g->add_option("--manifold", file, "key = value spec file");
    g->add_option("--preset", preset, "catalog preset, e.g. hyperbolic-2");
    g->add_option("--spec", spec, "inline spec, e.g. 'dimension = 3; g = sinh(r)'");
    g->require_option(1);
  }

  ManifoldPtr load() const {
    wml_manifold* m = nullptr;
    if (!file.empty()) {
      check(wml_manifold_from_file(file.c_str(), &m));
    } else if (!preset.empty()) {
      check(wml_manifold_from_preset(preset.c_str(), &m));
    } else {
      std::string text = spec;
      for (char& c : text)
        if (c == ';') c = '\n';
      check(wml_manifold_from_spec(text.c_str(), &m));
    }
    return ManifoldPtr(m, &wml_manifold_free);
  }
};

struct OutputArgs {
  std::string output;
  std::string csv;
  bool results_only = false;
  bool compact = false;

  void attach(CLI::App* cmd, bool with_csv) {
    cmd->add_option("-o,--output", output, "write the JSON report here instead of stdout");
    cmd->add_flag("--results-only", results_only, "print only the results payload");
    cmd->add_flag("--compact", compact, "single-line JSON");
    if (with_csv) cmd->add_option("--csv", csv, "write the result table as CSV plus a gnuplot script");
  }
};

std::string gnuplot_path(const std::string& csv) {
  const auto dot = csv.rfind('.');
  const auto slash = csv.rfind('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv.substr(0, dot) : csv) + ".gp";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw ApiFailure{WML_E_IO, "cannot write '" + path + "'"};
}

// CSV of {"columns": [...], "rows": [[...]]} and a gnuplot script plotting
// the second column (and any further ones) against the first.
void write_table(const Json& table, const std::string& path, const std::string& title, bool log_y) {
  std::string csv;
  const auto& cols = table.at("columns");
  for (std::size_t i = 0; i < cols.size(); ++i) csv += (i ? "," : "") + cols[i].get<std::string>();
  csv += "\n";
  for (const auto& row : table.at("rows")) {
    for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + row[i].dump();
    csv += "\n";
  }
  write_file(path, csv);
  std::string gp = "set datafile separator ','\nset key autotitle columnhead\nset title '" + title + "'\n";
  gp += "set xlabel '" + cols[0].get<std::string>() + "'\n";
  if (log_y) gp += "set logscale y\n";
  gp += "plot ";
  for (std::size_t i = 1; i < cols.size(); ++i)
    gp += (i > 1 ? ", " : "") + std::string("'") + path + "' using 1:" + std::to_string(i + 1) + " with linespoints";
  gp += "\n";
  write_file(gnuplot_path(path), gp);
}

class Runner {
 public:
  Runner(std::string command, const OutputArgs& out) : command_(std::move(command)), out_(out) {}

  Json arguments = Json::object();
  Json manifold;

  // Wraps a C API response into the report envelope, writes it and returns the exit code.
  // Artifact files are written before the report so a closed stdout cannot lose them.
  int emit(const std::string& response_text, double elapsed,
           const std::function<void(const Json&)>& write_artifacts = {}) {
    const Json resp = Json::parse(response_text);
    Json runtime = resp.at("runtime");
    runtime["elapsed_seconds"] = elapsed;
    Json report{{"schema_version", wml_schema_version()},
                {"tool_version", wml_version()},
                {"command", Json{{"name", command_}, {"arguments", arguments}}},
                {"manifold", manifold},
                {"timestamp", timestamp()},
                {"outcome", resp.at("outcome")},
                {"results", resp.at("results")},
                {"warnings", resp.at("warnings")},
                {"runtime", runtime}};
    if (write_artifacts) write_artifacts(resp.at("artifacts"));
    const Json& shown = out_.results_only ? report.at("results") : report;
    const std::string text = shown.dump(out_.compact ? -1 : 2) + "\n";
    if (out_.output.empty()) {
      std::cout << text;
    } else {
      write_file(out_.output, text);
    }
    for (const auto& w : report.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
    const std::string outcome = resp.at("outcome");
    if (outcome == "mismatch") return kExitMismatch;
    if (outcome == "inconclusive") return kExitInconclusive;
    return kExitOk;
  }

 private:
  static std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  const OutputArgs& out_;
};

template <class F>
std::pair<std::string, double> timed(F&& call) {
  const auto t0 = std::chrono::steady_clock::now();
  char* out = nullptr;
  check(call(&out));
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {take(out), dt};
}

Json describe(const ManifoldPtr& m) {
  char* out = nullptr;
  check(wml_manifold_describe(m.get(), &out));
  return Json::parse(take(out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic completeness, Feller property and spectra of weighted model manifolds"};
  app.set_version_flag("--version", std::string(wml_version()));
  app.require_subcommand(1);

  // classify
  auto* classify = app.add_subcommand("classify", "stochastic completeness and Feller verdicts");
  ManifoldArgs classify_m;
  OutputArgs classify_o;
  std::optional<double> exponent;
  classify_m.attach(classify);
  classify_o.attach(classify, false);
  classify->add_option("--exponent", exponent, "comparison exponent n replacing m in g^{n-1}");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "bottom of the spectrum on balls, exterior domains and at infinity");
  ManifoldArgs spectrum_m;
  OutputArgs spectrum_o;
  std::optional<double> ball, exterior;
  std::vector<double> interval, ess;
  spectrum_m.attach(spectrum);
  spectrum_o.attach(spectrum, true);
  auto* modes = spectrum->add_option_group("mode", "exactly one");
  modes->add_option("--ball", ball, "Dirichlet lambda1 of the ball of radius R");
  modes->add_option("--interval", interval, "annulus r_lo,r_hi")->delimiter(',')->expected(2);
  modes->add_option("--exterior", exterior, "lambda1 outside the ball of radius R");
  modes->add_option("--ess", ess, "radii for the essential-spectrum sweep, e.g. 1,2,4,8")->delimiter(',');
  modes->require_option(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo explosion or hitting-time estimates");
  ManifoldArgs simulate_m;
  OutputArgs simulate_o;
  Json sim_req = Json::object();
  long long paths = 10000, seed = 1, threads = 0, trace_paths = 20;
  double t_max = 1.0, dt = 1e-3, outer = 50.0, inner = 1e-4, r0 = 1.0, lambda = 1.0;
  std::optional<double> hitting_radius;
  std::vector<double> starts;
  std::string trace_file;
  simulate_m.attach(simulate);
  simulate_o.attach(simulate, false);
  simulate->add_option("--paths", paths, "number of paths (at least 100)")->capture_default_str();
  simulate->add_option("--t-max", t_max, "time horizon")->capture_default_str();
  simulate->add_option("--seed", seed, "Philox key")->capture_default_str();
  simulate->add_option("--dt", dt, "base step, at most 1e-3")->capture_default_str();
  simulate->add_option("--outer", outer, "absorbing radius")->capture_default_str();
  simulate->add_option("--inner", inner, "reflecting radius near the pole")->capture_default_str();
  simulate->add_option("--r0", r0, "start radius")->capture_default_str();
  simulate->add_option("--threads", threads, "worker count; 0 reads WML_THREADS")->capture_default_str();
  simulate->add_option("--hitting-radius", hitting_radius, "estimate E[exp(-lambda tau)] for this sphere");
  simulate->add_option("--lambda", lambda, "Laplace parameter for --hitting-radius")->capture_default_str();
  simulate->add_option("--starts", starts, "start radii for --hitting-radius")->delimiter(',');
  simulate->add_option("--trace", trace_file, "write per-path traces as CSV plus a gnuplot script");
  simulate->add_option("--trace-paths", trace_paths, "paths recorded by --trace")->capture_default_str();

  // profile
  auto* profile = app.add_subcommand("profile", "minimal exterior solution of Delta_f h = lambda h");
  ManifoldArgs profile_m;
  OutputArgs profile_o;
  double p_lambda = 1.0, p_radius = 1.0;
  std::optional<double> p_rmax;
  profile_m.attach(profile);
  profile_o.attach(profile, true);
  profile->add_option("--lambda", p_lambda)->capture_default_str();
  profile->add_option("--radius", p_radius, "inner radius R0 with h(R0) = 1")->capture_default_str();
  profile->add_option("--r-max", p_rmax, "sampling range");

  // heat
  auto* heat = app.add_subcommand("heat", "heat-semigroup mass under truncation doubling");
  ManifoldArgs heat_m;
  OutputArgs heat_o;
  double h_rinit = 1.0, h_t = 1.0, h_trunc = 4.0;
  long long h_doublings = 4;
  heat_m.attach(heat);
  heat_o.attach(heat, true);
  heat->add_option("--r-init", h_rinit)->capture_default_str();
  heat->add_option("--t", h_t)->capture_default_str();
  heat->add_option("--truncation", h_trunc, "first truncation radius")->capture_default_str();
  heat->add_option("--max-doublings", h_doublings)->capture_default_str();

  // audit
  auto* audit = app.add_subcommand("audit", "consistency audit of a soliton preset");
  OutputArgs audit_o;
  std::string audit_preset;
  audit->add_option("--preset", audit_preset, "gaussian-shrinker-m-lambda or steady-flat-m")->required();
  audit_o.attach(audit, false);

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "regenerate the example tables with pass/fail per cell");
  OutputArgs reproduce_o;
  std::string example;
  reproduce->add_option("example", example, "example id or 'all'")->required();
  reproduce_o.attach(reproduce, false);

  auto* presets = app.add_subcommand("presets", "list catalog presets and example ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*presets) {
      char* out = nullptr;
      check(wml_preset_catalog(&out));
      std::cout << "presets:\n" << take(out);
      check(wml_reproduction_ids(&out));
      std::cout << "examples:\n" << take(out) << "all\n";
      return kExitOk;
    }

    if (*classify) {
      auto m = classify_m.load();
      Runner run("classify", classify_o);
      Json req = Json::object();
      if (exponent) req["exponent"] = *exponent;
      run.arguments = req;
      run.manifold = describe(m);
      auto [text, t] = timed([&](char** o) { return wml_classify(m.get(), req.dump().c_str(), o); });
      return run.emit(text, t);
    }

    if (*spectrum) {
      auto m = spectrum_m.load();
      Runner run("spectrum", spectrum_o);
      Json req = Json::object();
      if (ball) req = {{"mode", "ball"}, {"radius", *ball}};
      if (!interval.empty()) req = {{"mode", "interval"}, {"r_lo", interval[0]}, {"r_hi", interval[1]}};
      if (exterior) req = {{"mode", "exterior"}, {"radius", *exterior}};
      if (!ess.empty()) req = {{"mode", "ess"}, {"radii", ess}};
      run.arguments = req;
      run.manifold = describe(m);
      auto [text, t] = timed([&](char** o) { return wml_spectrum(m.get(), req.dump().c_str(), o); });
      return run.emit(text, t, [&](const Json& art) {
        if (spectrum_o.csv.empty()) return;
        if (!art.contains("table")) throw ApiFailure{WML_E_USAGE, "--csv needs a sweep (--exterior or --ess)"};
        write_table(art.at("table"), spectrum_o.csv, "lambda1 against radius", false);
      });
    }

    if (*simulate) {
      auto m = simulate_m.load();
      Runner run("simulate", simulate_o);
      if (paths < 0 || seed < 0 || threads < 0 || trace_paths < 0)
        throw ApiFailure{WML_E_VALIDATION, "counts and seed must be non-negative"};
      Json req{{"paths", paths}, {"t_max", t_max}, {"seed", seed}, {"dt", dt},
               {"outer", outer}, {"inner", inner}, {"r0", r0}};
      if (hitting_radius) {
        Json h{{"radius", *hitting_radius}, {"lambda", lambda}};
        if (!starts.empty()) h["starts"] = starts;
        req["hitting"] = h;
      }
      if (!trace_file.empty()) req["trace_paths"] = trace_paths;
      run.arguments = req;
      req["threads"] = threads;
      run.manifold = describe(m);
      auto [text, t] = timed([&](char** o) { return wml_simulate(m.get(), req.dump().c_str(), o); });
      return run.emit(text, t, [&](const Json& art) {
        if (!trace_file.empty() && art.contains("trace")) write_table(art.at("trace"), trace_file, "radial paths", false);
      });
    }

    if (*profile) {
      auto m = profile_m.load();
      Runner run("profile", profile_o);
      Json req{{"lambda", p_lambda}, {"radius", p_radius}};
      if (p_rmax) req["r_max"] = *p_rmax;
      run.arguments = req;
      run.manifold = describe(m);
      auto [text, t] = timed([&](char** o) { return wml_profile(m.get(), req.dump().c_str(), o); });
      return run.emit(text, t, [&](const Json& art) {
        if (!profile_o.csv.empty()) write_table(art.at("table"), profile_o.csv, "minimal exterior solution", true);
      });
    }

    if (*heat) {
      auto m = heat_m.load();
      Runner run("heat", heat_o);
      Json req{{"r_init", h_rinit}, {"t", h_t}, {"truncation", h_trunc}, {"max_doublings", h_doublings}};
      run.arguments = req;
      run.manifold = describe(m);
      auto [text, t] = timed([&](char** o) { return wml_heat(m.get(), req.dump().c_str(), o); });
      return run.emit(text, t, [&](const Json& art) {
        if (!heat_o.csv.empty()) write_table(art.at("table"), heat_o.csv, "heat mass", false);
      });
    }

    if (*audit) {
      Runner run("audit", audit_o);
      run.arguments = {{"preset", audit_preset}};
      auto [text, t] = timed([&](char** o) { return wml_audit(audit_preset.c_str(), o); });
      const Json resp = Json::parse(text);
      run.manifold = resp.at("artifacts").at("manifold");
      run.manifold["source"] = {{"kind", "preset"}, {"name", audit_preset}};
      return run.emit(text, t);
    }

    if (*reproduce) {
      Runner run("reproduce", reproduce_o);
      run.arguments = {{"example", example}};
      auto [text, t] = timed([&](char** o) { return wml_reproduce(example.c_str(), o); });
      const int code = run.emit(text, t);
      const Json results = Json::parse(text).at("results");
      for (const auto& ex : results.at("examples")) {
        std::cerr << ex.at("example").get<std::string>() << ": " << ex.at("passed").get<long>() << "/"
                  << ex.at("cells").get<long>() << " cells pass\n";
      }
      return code;
    }
  } catch (const ApiFailure& f) {
    std::cerr << "error (" << wml_status_name(f.status) << "): " << f.message << "\n";
    return exit_code_for(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
