#include "wml/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "wml/error.hpp"

namespace wml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// 7-point Gauss weights for kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b;
  double log_value;
  double log_error;
  bool operator<(const Piece& o) const { return log_error < o.log_error; }
};

Piece gk15(const LogIntegrand& log_f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 15> lf{};
  lf[0] = log_f(center);
  for (int i = 0; i < 7; ++i) {
    lf[1 + 2 * i] = log_f(center - half * kXgk[i]);
    lf[2 + 2 * i] = log_f(center + half * kXgk[i]);
  }
  double m = kNegInf;
  for (double v : lf) {
    if (std::isnan(v)) throw Error(ErrorKind::Quadrature, "integrand is not evaluable");
    m = std::max(m, v);
  }
  if (m == kNegInf) return {a, b, kNegInf, kNegInf};
  if (m == std::numeric_limits<double>::infinity())
    throw Error(ErrorKind::Quadrature, "integrand overflows the log range");
  auto w = [&](int idx) { return std::exp(lf[idx] - m); };
  double kron = kWgk[7] * w(0);
  double gauss = kWg[3] * w(0);
  for (int i = 0; i < 7; ++i) {
    const double pair = w(1 + 2 * i) + w(2 + 2 * i);
    kron += kWgk[i] * pair;
    if (i % 2 == 1) gauss += kWg[i / 2] * pair;
  }
  const double log_half = std::log(half);
  const double value = kron > 0 ? m + log_half + std::log(kron) : kNegInf;
  const double err_abs = std::abs(kron - gauss);
  const double error = err_abs > 0 ? m + log_half + std::log(err_abs) : kNegInf;
  return {a, b, value, error};
}

double log_sum(const std::vector<Piece>& pieces, double Piece::*field) {
  double m = kNegInf;
  for (const auto& p : pieces) m = std::max(m, p.*field);
  if (m == kNegInf) return kNegInf;
  double s = 0;
  for (const auto& p : pieces) s += std::exp(p.*field - m);
  return m + std::log(s);
}

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

LogQuadResult log_integrate(const LogIntegrand& log_f, double a, double b, double rel_tol,
                            int max_intervals) {
  const std::array<double, 2> bp = {a, b};
  return log_integrate(log_f, bp, rel_tol, max_intervals);
}

LogQuadResult log_integrate(const LogIntegrand& log_f, std::span<const double> breakpoints,
                            double rel_tol, int max_intervals) {
  if (breakpoints.size() < 2) throw Error(ErrorKind::Quadrature, "need at least two breakpoints");
  std::priority_queue<Piece> queue;
  std::vector<Piece> done;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw Error(ErrorKind::Quadrature, "breakpoints must be strictly increasing");
    queue.push(gk15(log_f, breakpoints[i], breakpoints[i + 1]));
  }
  const double log_tol = std::log(rel_tol);
  LogQuadResult result;
  for (;;) {
    std::vector<Piece> all(done);
    {
      auto copy = queue;
      while (!copy.empty()) {
        all.push_back(copy.top());
        copy.pop();
      }
    }
    result.log_value = log_sum(all, &Piece::log_value);
    result.log_error = log_sum(all, &Piece::log_error);
    result.intervals = static_cast<int>(all.size());
    if (result.log_value == kNegInf || result.log_error <= log_tol + result.log_value) {
      result.converged = true;
      return result;
    }
    if (result.intervals >= max_intervals || queue.empty()) {
      result.converged = false;
      return result;
    }
    // Split the pieces carrying the largest errors.
    const int batch = std::max<int>(1, static_cast<int>(queue.size()) / 4);
    for (int k = 0; k < batch && !queue.empty(); ++k) {
      Piece worst = queue.top();
      queue.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(mid > worst.a && mid < worst.b)) {
        done.push_back(worst);  // interval exhausted at machine resolution
        continue;
      }
      queue.push(gk15(log_f, worst.a, mid));
      queue.push(gk15(log_f, mid, worst.b));
    }
  }
}

namespace {

// Relative accuracy attainable for exp(phi(s) - phi(t)) when |phi| is large.
double ratio_tolerance(double phi_t) {
  return std::max(1e-11, 256.0 * std::numeric_limits<double>::epsilon() * std::abs(phi_t));
}

}  // namespace

double log_head_ratio(const LogDensity& log_density, double t, double lower) {
  if (!(t > lower)) return kNegInf;
  const Jet2 at = log_density(t);
  const double p = at.d1;
  const double q = at.d2;
  if (p > 0) {
    const double w = 1.0 / p;
    if (w < 1e-6 * (t - lower) && std::abs(q) * w * w < 0.05) {
      return std::log(w + q * w * w * w + 3.0 * q * q * w * w * w * w * w);
    }
  }
  const double span = t - lower;
  const double w = p > 0 ? std::min(span, 1.0 / p) / 8.0 : span / 8.0;
  std::vector<double> bp = {t};
  for (double step = w; t - step > lower; step *= 2.0) bp.push_back(t - step);
  bp.push_back(lower);
  std::reverse(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const double phi_t = at.value;
  auto integrand = [&](double s) { return log_density(s).value - phi_t; };
  return log_integrate(integrand, bp, ratio_tolerance(phi_t), 6000).log_value;
}

double log_tail_ratio(const LogDensity& log_density, double t) {
  const Jet2 at = log_density(t);
  const double p = -at.d1;
  const double q = at.d2;
  if (p > 0) {
    const double w = 1.0 / p;
    if (w < 1e-6 * t && std::abs(q) * w * w < 0.05) {
      return std::log(w + q * w * w * w + 3.0 * q * q * w * w * w * w * w);
    }
  }
  const double w = p > 0 ? std::min(std::max(t, 1.0), 1.0 / p) / 8.0 : std::max(t, 1.0) / 8.0;
  const double phi_t = at.value;
  auto integrand = [&](double s) { return log_density(s).value - phi_t; };
  double total = kNegInf;
  double left = t;
  for (int k = 0; k < 400; ++k) {
    const double right = t + w * std::ldexp(1.0, k + 1) - w;
    if (!std::isfinite(right)) break;
    const double chunk = log_integrate(integrand, left, right, ratio_tolerance(phi_t), 2000).log_value;
    const double before = total;
    total = log_add(total, chunk);
    left = right;
    if (k >= 4 && (chunk == kNegInf || chunk < before + std::log(1e-17))) return total;
  }
  return std::numeric_limits<double>::infinity();
}

CumulativeLogIntegral::CumulativeLogIntegral(LogIntegrand log_f, double origin, double rel_tol)
    : log_f_(std::move(log_f)), origin_(origin), rel_tol_(rel_tol) {}

double CumulativeLogIntegral::operator()(double x) {
  if (!(x > origin_)) return kNegInf;
  // Checkpoints sit at origin + 2^j for j >= kMinExp.
  constexpr int kMinExp = -20;
  const int k = static_cast<int>(std::floor(std::log2(x - origin_)));
  if (k < kMinExp) return log_integrate(log_f_, origin_, x, rel_tol_).log_value;
  while (static_cast<int>(checkpoints_.size()) <= k - kMinExp) {
    const int j = kMinExp + static_cast<int>(checkpoints_.size());
    const double right = origin_ + std::ldexp(1.0, j);
    const double left = j == kMinExp ? origin_ : origin_ + std::ldexp(1.0, j - 1);
    const double prev = checkpoints_.empty() ? kNegInf : checkpoints_.back();
    checkpoints_.push_back(log_add(prev, log_integrate(log_f_, left, right, rel_tol_).log_value));
  }
  const double base = origin_ + std::ldexp(1.0, k);
  const double acc = checkpoints_[k - kMinExp];
  if (!(x > base)) return acc;
  return log_add(acc, log_integrate(log_f_, base, x, rel_tol_).log_value);
}

}  // namespace wml
