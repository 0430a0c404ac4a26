#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "wml/soliton.hpp"

using namespace wml;

TEST_CASE("soliton presets pass the audit") {
  for (const char* name : {"gaussian-shrinker-2-0.5", "gaussian-shrinker-3-1", "steady-flat-3"}) {
    CAPTURE(name);
    const auto a = audit_soliton(soliton_preset(name), name);
    CHECK(a.all_pass);
    CHECK(a.basic_eq_residual < 1e-8);
    CHECK(a.sc == Answer::Yes);
    CHECK(a.feller == Answer::Yes);
  }
}

TEST_CASE("shrinker has finite volume and discrete spectrum") {
  const auto a = audit_soliton(soliton_preset("gaussian-shrinker-3-1"));
  CHECK(a.volume_finite);
  CHECK(!a.ess_bottom);
  CHECK(a.gradient_slope == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("steady flat soliton has ess bottom zero") {
  const auto a = audit_soliton(soliton_preset("steady-flat-3"));
  REQUIRE(a.ess_bottom);
  CHECK(*a.ess_bottom == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(!a.volume_finite);
  CHECK(a.scal2_lower <= *a.ess_bottom + 1e-6);
}

TEST_CASE("a wrong soliton constant is detected") {
  auto p = soliton_preset("gaussian-shrinker-3-1");
  p.soliton_constant = 0.8;
  const auto a = audit_soliton(p, "perturbed");
  CHECK(!a.all_pass);
  CHECK(std::find(a.failures.begin(), a.failures.end(), "basic equation residual") != a.failures.end());
}
