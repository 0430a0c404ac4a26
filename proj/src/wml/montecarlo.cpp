#include "wml/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "wml/error.hpp"

namespace wml {

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

void validate(const SimConfig& cfg) {
  if (cfg.n_paths < 100) throw ValidationError("n_paths must be at least 100");
  if (!(cfg.dt_base > 0.0 && cfg.dt_base <= 1e-3)) throw ValidationError("dt_base must lie in (0, 1e-3]");
  if (!(cfg.t_max >= 0.0)) throw ValidationError("t_max must be non-negative");
  if (!(cfg.r_reflect_inner > 0.0 && cfg.r_absorb_outer > cfg.r_reflect_inner))
    throw ValidationError("need 0 < r_reflect_inner < r_absorb_outer");
}

int default_thread_count() {
  if (const char* env = std::getenv("WML_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

enum class Fate { Survived, Outer, Hit, Underflow };

struct PathResult {
  Fate fate = Fate::Survived;
  double tau = 0.0;
  std::uint64_t steps = 0;
};

inline double unit(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1p-32; }

struct PathSpec {
  double r0;
  double inner_absorb;  // 0: reflect at r_reflect_inner instead
  std::uint32_t stream;
  double dt_scale;
};

PathResult run_path(const ModelManifold& M, const SimConfig& cfg, const PathSpec& spec, std::uint64_t path,
                    std::vector<TracePoint>* trace) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32)};
  const double outer = cfg.r_absorb_outer;
  const double inner = spec.inner_absorb;
  const double reflect = cfg.r_reflect_inner;
  PathResult res;
  double x = spec.r0, t = 0.0;
  if (trace) trace->push_back({path, t, x});
  if (inner > 0.0 && x <= inner) {
    res.fate = Fate::Hit;
    return res;
  }
  std::uint64_t step = 0;
  while (t < cfg.t_max) {
    const Jet2 j = M.log_density_jet(x);
    const double drift = j.d1;
    double dt = cfg.dt_base;
    if (drift != 0.0) dt = std::min(dt, 0.1 * x / std::abs(drift));
    if (j.d2 != 0.0) dt = std::min(dt, 0.1 / std::abs(j.d2));
    dt = std::min(dt, 0.005 * x * x) * spec.dt_scale;
    if (dt < 1e-12) {
      res.fate = Fate::Underflow;
      res.tau = t;
      break;
    }
    dt = std::min(dt, cfg.t_max - t);
    const auto w = Philox4x32::block({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                                      static_cast<std::uint32_t>(path),
                                      static_cast<std::uint32_t>(path >> 32) ^ (spec.stream << 20)},
                                     key);
    ++step;
    const double z = std::sqrt(-2.0 * std::log(unit(w[0]))) * std::cos(2.0 * std::numbers::pi * unit(w[1]));
    double y = x + drift * dt + std::sqrt(2.0 * dt) * z;
    if (inner == 0.0 && y < reflect) y = std::max(2.0 * reflect - y, reflect);
    t += dt;
    // Crossing inside the step, from the Brownian bridge with variance 2 dt.
    if (y >= outer || std::exp(-(outer - x) * (outer - y) / dt) > unit(w[2])) {
      res.fate = Fate::Outer;
      res.tau = t;
      x = std::max(y, outer);
      break;
    }
    if (inner > 0.0 && (y <= inner || std::exp(-(x - inner) * (y - inner) / dt) > unit(w[3]))) {
      res.fate = Fate::Hit;
      res.tau = t;
      x = inner;
      break;
    }
    x = y;
    if (trace) trace->push_back({path, t, x});
  }
  if (trace && res.fate != Fate::Survived) trace->push_back({path, res.tau, x});
  res.steps = step;
  if (res.fate == Fate::Survived) res.tau = cfg.t_max;
  return res;
}

std::vector<PathResult> run_batch(const ModelManifold& M, const SimConfig& cfg, const PathSpec& spec,
                                  const std::vector<std::uint64_t>& paths, std::vector<TracePoint>* trace,
                                  int threads) {
  std::vector<PathResult> out(paths.size());
  std::vector<std::vector<TracePoint>> traces(paths.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const bool traced = trace && paths[i] < cfg.trace_paths;
      out[i] = run_path(M, cfg, spec, paths[i], traced ? &traces[i] : nullptr);
    }
  };
  const std::size_t n = paths.size();
  const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (nt == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      pool.emplace_back([&, k] {
        try {
          work(n * k / nt, n * (k + 1) / nt);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (trace)
    for (auto& tr : traces) trace->insert(trace->end(), tr.begin(), tr.end());
  return out;
}

std::vector<std::uint64_t> all_paths(std::size_t n) {
  std::vector<std::uint64_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

std::vector<std::uint64_t> check_paths(std::size_t n) {
  std::vector<std::uint64_t> p;
  for (std::size_t i = 0; i < n; i += 10) p.push_back(i);
  return p;
}

struct MeanCi {
  double mean;
  double ci;
};

MeanCi mean_ci(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, 1.96 * sd / std::sqrt(n)};
}

// Two estimates from independent samples agree within the combined 95% band.
bool within_band(const MeanCi& a, const MeanCi& b, std::size_t n) {
  const double band = std::sqrt(a.ci * a.ci + b.ci * b.ci) + 1.0 / static_cast<double>(n);
  return std::abs(a.mean - b.mean) <= band;
}

}  // namespace

SimReport simulate_explosion(const ModelManifold& M, double r0, const SimConfig& cfg) {
  validate(cfg);
  if (!(r0 > 0.0 && r0 < cfg.r_absorb_outer)) throw DomainError("need 0 < r0 < r_absorb_outer");
  SimReport rep;
  rep.threads_used = cfg.threads > 0 ? cfg.threads : default_thread_count();
  const PathSpec spec{r0, 0.0, 0, 1.0};
  const auto res = run_batch(M, cfg, spec, all_paths(cfg.n_paths), cfg.trace_paths ? &rep.trace : nullptr,
                             rep.threads_used);
  std::vector<double> exploded(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    exploded[i] = (res[i].fate == Fate::Outer || res[i].fate == Fate::Underflow) ? 1.0 : 0.0;
    if (res[i].fate == Fate::Underflow) ++rep.underflow_paths;
    rep.total_steps += res[i].steps;
  }
  const auto mc = mean_ci(exploded);
  rep.explosion_fraction = mc.mean;
  rep.ci95_halfwidth = mc.ci;
  rep.n_effective = res.size();
  if (cfg.dt_check) {
    const auto sub = check_paths(cfg.n_paths);
    const auto half = run_batch(M, cfg, PathSpec{r0, 0.0, 1, 0.5}, sub, nullptr, rep.threads_used);
    std::vector<double> full_v, half_v;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      full_v.push_back(exploded[sub[i]]);
      half_v.push_back((half[i].fate == Fate::Outer || half[i].fate == Fate::Underflow) ? 1.0 : 0.0);
    }
    const auto a = mean_ci(full_v), b = mean_ci(half_v);
    rep.dt_check_paths = sub.size();
    rep.dt_check_full = a.mean;
    rep.dt_check_half = b.mean;
    rep.dt_stable = within_band(a, b, sub.size());
  }
  if (rep.underflow_paths > 0)
    rep.diagnostic = std::to_string(rep.underflow_paths) +
                     " paths hit the step floor 1e-12 (runaway drift, counted as explosion)";
  if (!rep.dt_stable) rep.diagnostic += (rep.diagnostic.empty() ? "" : "; ") + std::string("half-step rerun disagrees");
  return rep;
}

SimReport hitting_laplace(const ModelManifold& M, const std::vector<double>& r0s, double R0, double lambda,
                          const SimConfig& cfg) {
  validate(cfg);
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(R0 > cfg.r_reflect_inner)) throw DomainError("R0 must exceed the reflecting radius");
  SimReport rep;
  rep.threads_used = cfg.threads > 0 ? cfg.threads : default_thread_count();
  std::uint32_t stream = 0;
  bool stable = true;
  for (double r0 : r0s) {
    if (!(r0 >= R0 && r0 < cfg.r_absorb_outer)) throw DomainError("need R0 <= r0 < r_absorb_outer");
    const auto res = run_batch(M, cfg, PathSpec{r0, R0, stream, 1.0}, all_paths(cfg.n_paths),
                               cfg.trace_paths && stream == 0 ? &rep.trace : nullptr, rep.threads_used);
    std::vector<double> contrib(res.size());
    HittingEstimate est;
    est.r_start = r0;
    est.lambda = lambda;
    for (std::size_t i = 0; i < res.size(); ++i) {
      contrib[i] = res[i].fate == Fate::Hit ? std::exp(-lambda * res[i].tau) : 0.0;
      if (res[i].fate == Fate::Survived) est.survived_fraction += 1.0;
      if (res[i].fate == Fate::Outer || res[i].fate == Fate::Underflow) est.outward_fraction += 1.0;
      if (res[i].fate == Fate::Underflow) ++rep.underflow_paths;
      rep.total_steps += res[i].steps;
    }
    const double n = static_cast<double>(res.size());
    est.survived_fraction /= n;
    est.outward_fraction /= n;
    est.remainder_bound = est.survived_fraction * std::exp(-lambda * cfg.t_max);
    const auto mc = mean_ci(contrib);
    est.estimate = mc.mean;
    est.ci95 = mc.ci;
    if (cfg.dt_check && r0 > R0) {
      const auto sub = check_paths(cfg.n_paths);
      const auto half = run_batch(M, cfg, PathSpec{r0, R0, stream + 1, 0.5}, sub, nullptr, rep.threads_used);
      std::vector<double> full_v, half_v;
      for (std::size_t i = 0; i < sub.size(); ++i) {
        full_v.push_back(contrib[sub[i]]);
        half_v.push_back(half[i].fate == Fate::Hit ? std::exp(-lambda * half[i].tau) : 0.0);
      }
      const auto a = mean_ci(full_v), b = mean_ci(half_v);
      rep.dt_check_paths += sub.size();
      rep.dt_check_full = a.mean;
      rep.dt_check_half = b.mean;
      stable = stable && within_band(a, b, sub.size());
    }
    rep.hitting_estimates.push_back(est);
    rep.n_effective = res.size();
    stream += 2;
  }
  rep.dt_stable = stable;
  if (!r0s.empty()) {
    rep.explosion_fraction = rep.hitting_estimates.front().outward_fraction;
    rep.ci95_halfwidth = rep.hitting_estimates.front().ci95;
  }
  if (!stable) rep.diagnostic = "half-step rerun disagrees";
  return rep;
}

SimReport hitting_laplace(const ModelManifold& M, double r0, double R0, double lambda, const SimConfig& cfg) {
  return hitting_laplace(M, std::vector<double>{r0}, R0, lambda, cfg);
}

void write_trace_csv(const SimReport& rep, std::ostream& out) {
  out << "path,t,r\n";
  out.precision(17);
  for (const auto& p : rep.trace) out << p.path << ',' << p.t << ',' << p.r << '\n';
}

}  // namespace wml
