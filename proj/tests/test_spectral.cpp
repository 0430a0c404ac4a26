#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "wml/error.hpp"
#include "wml/quadrature.hpp"
#include "wml/radial_ode.hpp"
#include "wml/spectral.hpp"

using namespace wml;

namespace {
constexpr double kPi = std::numbers::pi;

bool agrees(const EigenResult& r) {
  return r.cross_check && std::abs(*r.cross_check - r.lambda1) <= std::max(1e-6, 1e-4 * r.lambda1);
}
}  // namespace

TEST_CASE("ball and annulus eigenvalues against closed forms") {
  // u = sin(pi r)/r on the unit ball of R^3.
  const auto ball = lambda1_interval(preset("euclidean-3"), 0.0, 1.0);
  CHECK(std::abs(ball.lambda1 - kPi * kPi) < 1e-6);
  CHECK(agrees(ball));
  // Disc: first zero of J0.
  const double j01 = boost::math::cyl_bessel_j_zero(0.0, 1);
  CHECK(lambda1_interval(preset("euclidean-2"), 0.0, 2.0).lambda1 == doctest::Approx(j01 * j01 / 4.0).epsilon(1e-8));
  // Euclidean annulus in R^3: u = sin(pi (r-1)/L)/r.
  CHECK(lambda1_interval(preset("euclidean-3"), 1.0, 3.0).lambda1 == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-8));
  // Geodesic ball in H^3: 1 + pi^2/R^2.
  CHECK(lambda1_interval(preset("hyperbolic-3"), 0.0, 2.0).lambda1 ==
        doctest::Approx(1.0 + kPi * kPi / 4.0).epsilon(1e-8));
  const auto ann = lambda1_interval(preset("hyperbolic-2"), 5.0, 15.0);
  CHECK(ann.lambda1 >= 0.25);
  CHECK(agrees(ann));
  CHECK(lambda1_interval(preset("euclidean-3"), 5.0, 5.0 + 1e-9).lambda1 > 1e10);
  CHECK_THROWS_AS(lambda1_interval(preset("euclidean-3"), 2.0, 1.0), DomainError);
}

TEST_CASE("shooting and finite differences agree on every preset") {
  for (const auto& name : preset_catalog()) {
    const auto M = preset(name);
    for (auto [lo, hi] : {std::pair{0.0, 1.0}, std::pair{1.0, 3.0}}) {
      const auto r = lambda1_interval(M, lo, hi);
      INFO(name << " (" << lo << ", " << hi << ") shoot " << r.lambda1 << " fd " << r.cross_check.value_or(-1));
      CHECK(agrees(r));
    }
  }
}

TEST_CASE("domain monotonicity on nested intervals") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto M = preset("exp-alpha-3-2");
  SpectralOptions fast;
  fast.cross_check = false;
  for (int trial = 0; trial < 20; ++trial) {
    const double lo = 0.2 + 2.0 * U(rng), hi = lo + 0.2 + 2.0 * U(rng);
    const double lo2 = lo * U(rng), hi2 = hi + U(rng);
    CHECK(lambda1_interval(M, lo2, hi2, fast).lambda1 <= lambda1_interval(M, lo, hi, fast).lambda1 * (1 + 1e-9));
  }
}

TEST_CASE("weight shift leaves eigenvalues unchanged") {
  const auto M = preset("gaussian-shrinker-3-1");
  const auto S = M.with_weight_shift(25.0);
  SpectralOptions fast;
  fast.cross_check = false;
  CHECK(std::abs(lambda1_interval(M, 0.0, 2.0, fast).lambda1 - lambda1_interval(S, 0.0, 2.0, fast).lambda1) < 1e-9);
  const double f1 = lambda1_interval_fd(M, 1.0, 2.0).lambda1, f2 = lambda1_interval_fd(S, 1.0, 2.0).lambda1;
  CHECK(std::abs(f1 - f2) < 1e-9 * f1);
}

TEST_CASE("exterior eigenvalues") {
  const auto e = lambda1_exterior(preset("euclidean-3"), 1.0);
  CHECK(std::abs(e.lambda1) < 1e-6);
  for (std::size_t i = 1; i < e.history.size(); ++i) CHECK(e.history[i].second <= e.history[i - 1].second + 1e-12);
  const auto h = lambda1_exterior(preset("hyperbolic-2"), 1.0);
  CHECK(std::abs(h.lambda1 - 0.25) < 1e-3);
  CHECK(h.lambda1 >= half_drift_squared_bound(preset("hyperbolic-2"), 1.0).value - 1e-6);

  const auto D = preset("exp-alpha-2-3");
  double prev = 0.0;
  for (double R : {1.0, 2.0, 4.0}) {
    const double l = lambda1_exterior(D, R).lambda1;
    CHECK(l > prev);
    CHECK(l >= half_drift_squared_bound(D, R).value);
    prev = l;
  }
  ExteriorSpectralOptions strict;
  strict.max_doublings = 2;
  CHECK_THROWS_AS(lambda1_exterior(preset("euclidean-3"), 1.0, strict), Error);
}

TEST_CASE("essential spectrum bottom") {
  const auto hyp = ess_spectrum_bottom(preset("hyperbolic-2"));
  REQUIRE(hyp.bottom_estimate);
  CHECK(std::abs(*hyp.bottom_estimate - 0.25) < 1e-3);
  CHECK(hyp.monotone_ok);
  const auto euc = ess_spectrum_bottom(preset("euclidean-3"), {1.0, 2.0});
  REQUIRE(euc.bottom_estimate);
  CHECK(std::abs(*euc.bottom_estimate) < 1e-6);
  const auto disc = ess_spectrum_bottom(preset("exp-alpha-2-3"));
  CHECK(disc.unbounded);
  CHECK_FALSE(disc.bottom_estimate);
  CHECK(disc.monotone_ok);

  const auto rec = brooks_vs_ess(preset("hyperbolic-2"), hyp);
  REQUIRE(rec.brooks);
  CHECK(rec.consistent);
  CHECK(*rec.brooks == doctest::Approx(1.0).epsilon(0.01));
  CHECK(brooks_vs_ess(preset("euclidean-3"), euc).consistent);
  CHECK(brooks_vs_ess(preset("exp-alpha-2-3"), disc).skipped);
}

TEST_CASE("Barta bounds") {
  const auto H = preset("hyperbolic-2");
  const auto half = barta_vector_bound(H, parse_expr("0.5"), 0.0, kInfinity);
  CHECK(half.value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(half.value <= 0.25 + 1e-12);
  // Function form with u = e^{-r/2} gives the same quantity.
  const auto fn = barta_function_bound(H, parse_expr("exp(-r/2)"), 0.0, kInfinity);
  CHECK(fn.value == doctest::Approx(half.value).epsilon(1e-9));

  const auto E = preset("euclidean-3");
  const auto flat = barta_vector_bound(E, parse_expr("0.3"), 1.0, kInfinity);
  CHECK(flat.status == BoundStatus::Ok);
  CHECK(flat.value < 0.0);
  CHECK(flat.value >= -0.09 - 1e-9);
  CHECK(barta_vector_bound(E, parse_expr("r"), 1.0, kInfinity).status == BoundStatus::UnboundedBelow);
  CHECK_THROWS_AS(barta_function_bound(E, parse_expr("1-r"), 0.0, 2.0), ValidationError);

  // A cosine trial function under-estimates every ball eigenvalue.
  for (const char* name : {"euclidean-3", "hyperbolic-2", "gaussian-shrinker-2-0.5"}) {
    const auto M = preset(name);
    const double l = lambda1_interval(M, 0.0, 1.0).lambda1;
    const auto b = barta_function_bound(M, parse_expr("cos(1.5*r)"), 0.0, 1.0);
    CHECK(b.value <= l + 1e-6);
  }
  // -Delta u/u = 9 exactly for u = sin(3r)/r; the sampling margin only lowers it.
  const auto exact = barta_function_bound(E, parse_expr("sin(3*r)/r"), 0.0, 1.0);
  CHECK(exact.value <= 9.0 + 1e-9);
  CHECK(exact.value == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("Barta function u* - alpha grows along the exhaustion") {
  const auto G = preset("exp-growth-2");
  const double u_star = alpha_limit(G);
  auto density = [&](double s) { return G.log_density_jet(s); };
  auto u = [&](double r) {
    const double head = std::exp(log_head_ratio(density, r));
    return Jet2{u_star - alpha_function(G, r), -head, -(1.0 - G.drift(r) * head)};
  };
  BartaOptions opts;
  opts.samples = 60;
  opts.far_radius = 40.0;
  double prev = 0.0;
  for (double R : {1.0, 2.0, 3.0}) {
    // -Delta_f u/u = 1/(u* - alpha), increasing in r: the infimum sits at R.
    const double b = barta_function_bound(G, u, R, kInfinity, opts).value;
    const double exact = 1.0 / (u_star - alpha_function(G, R));
    CHECK(b <= exact * (1 + 1e-9));
    CHECK(b >= 0.9 * exact);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("Cheng comparison") {
  const double j11 = boost::math::cyl_bessel_j_zero(1.0, 1);
  const auto flat = cheng_upper_bound(0.0, 0.0, 3, 1.0);
  CHECK(flat.value == doctest::Approx(j11 * j11).epsilon(1e-9));
  CHECK(kPi * kPi <= flat.value);
  // Hemisphere of S^2: first eigenfunction cos(theta), eigenvalue 2.
  CHECK(spaceform_ball_lambda1(1.0, 2, kPi / 2) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_THROWS_AS(spaceform_ball_lambda1(1.0, 2, kPi), DomainError);
  CHECK(cheng_upper_bound(0.0, 0.0, 2, 1e-3).value > 1e6);

  const auto S = preset("gaussian-shrinker-3-1");
  for (double R : {1.0, 2.0, 4.0}) {
    const auto [alpha, beta] = cheng_constants(S, R);
    CHECK(alpha == 0.0);
    CHECK(beta == doctest::Approx(R * R).epsilon(1e-2));
    CHECK(lambda1_interval(S, 0.0, R).lambda1 <= cheng_upper_bound(alpha, beta, 3, R).value);
  }
}

TEST_CASE("Qian drift bounds") {
  CHECK(qian_drift_bound_I(0, 0, 3, 2.0).value == 1.0);
  CHECK(qian_drift_bound_III(0, 0, 0, 3, 2.0).value == 1.0);
  const auto ii = qian_drift_bound_II(parse_expr("1"), parse_expr("1"), 2, 1.5);
  CHECK(ii.value == doctest::Approx(2.0 / std::tanh(1.5)).epsilon(1e-8));
  CHECK(preset("hyperbolic-2").drift(1.5) <= ii.value);
  const auto E = preset("euclidean-3");
  for (double r : {0.5, 1.0, 4.0}) CHECK(E.drift(r) <= qian_drift_bound_I(0.0, 0.0, 3, r).value + 1e-15);
}

TEST_CASE("half drift squared") {
  CHECK(half_drift_squared_bound(preset("hyperbolic-2"), 1.0).value == doctest::Approx(0.25).epsilon(1e-9));
  const auto e = half_drift_squared_bound(preset("euclidean-3"), 1.0);
  CHECK(e.status == BoundStatus::Ok);
  CHECK(e.value < 1e-9);
  CHECK(half_drift_squared_bound(preset("gaussian-shrinker-2-0.5"), 1.0).status == BoundStatus::Inapplicable);
  const auto D = preset("exp-alpha-2-3");
  const auto b = half_drift_squared_bound(D, 2.0);
  CHECK(b.value == doctest::Approx(0.25 * std::pow(D.drift(2.0), 2)).epsilon(1e-9));
}

TEST_CASE("semilinear and soliton closed forms") {
  CHECK(semilinear_inf_bound(1, 1, 2, 0).value == 1.0);
  CHECK(semilinear_inf_bound(-1, 1, 2, 0).status == BoundStatus::NonExistence);
  CHECK(semilinear_inf_bound(1, 2, 3, 1).value == doctest::Approx(1.0));
  const double c = 0.7;
  CHECK(prop40_bound(0, 2, 3, c, 1.5).value == doctest::Approx(std::sqrt((c / 2) * (1 + 2.25) / 2.25)));
  CHECK(prop40_bound(1, 1, 2, c, 1e6).value == doctest::Approx(1 + c).epsilon(1e-9));
  // Constant solution 1 of Delta u = u - u^2 in R^3 sits below the bound on unit balls.
  const double c1 = prop40_constant(0.0, 0.0, 3, 1.0);
  CHECK(c1 == doctest::Approx(0.5 * cheng_upper_bound(0, 0, 3, 1).value));
  CHECK(1.0 <= prop40_bound(1, 1, 2, c1, 1.0).value);
  const auto s = soliton_scalar_bound(0.0, 3, 1.0);
  CHECK(s.value == -1.0);
  CHECK(s.value <= 0.0);  // ess bottom of a shrinker is >= 0
}

TEST_CASE("a priori bound on the shrinker") {
  const auto sp = soliton_preset("gaussian-shrinker-3-1");
  const double ls = sp.soliton_constant;
  const int m = sp.base.dimension();
  const auto rep = apriori_check(sp.base, -ls, 1.0 / m, 2.0, {0.1, 0.5, 1.0, 2.0, 2.9, 3.1, 4.0, 6.0}, 6.0);
  CHECK(rep.bound == doctest::Approx(m * ls));
  CHECK(rep.holds);
  for (const auto& s : rep.samples)
    if (s.u0 > rep.bound) CHECK(s.outcome != AprioriOutcome::Bounded);
}
