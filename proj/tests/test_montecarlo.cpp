#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wml/error.hpp"
#include "wml/montecarlo.hpp"

using namespace wml;

TEST_CASE("Philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("configuration validation") {
  SimConfig cfg;
  cfg.n_paths = 10;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.n_paths = 100;
  cfg.dt_base = 1e-2;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.dt_base = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.dt_base = 1e-3;
  cfg.r_reflect_inner = 60.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.r_reflect_inner = 1e-4;
  CHECK_NOTHROW(validate(cfg));
  CHECK_THROWS_AS(simulate_explosion(preset("euclidean-3"), 80.0, cfg), DomainError);
  CHECK_THROWS_AS(hitting_laplace(preset("euclidean-3"), 0.5, 1.0, 1.0, cfg), DomainError);
}

TEST_CASE("results do not depend on the worker count") {
  const auto M = preset("exp-growth-2");
  SimConfig cfg;
  cfg.n_paths = 600;
  cfg.seed = 7;
  cfg.threads = 1;
  const auto a = simulate_explosion(M, 1.0, cfg);
  cfg.threads = 3;
  const auto b = simulate_explosion(M, 1.0, cfg);
  CHECK(a.explosion_fraction == b.explosion_fraction);
  CHECK(a.ci95_halfwidth == b.ci95_halfwidth);
  CHECK(a.total_steps == b.total_steps);
  CHECK(a.dt_check_half == b.dt_check_half);
  cfg.seed = 8;
  const auto c = simulate_explosion(M, 1.0, cfg);
  CHECK(c.total_steps != a.total_steps);
}

TEST_CASE("complete models do not explode") {
  SimConfig cfg;
  cfg.n_paths = 2000;
  cfg.seed = 3;
  const auto rep = simulate_explosion(preset("euclidean-3"), 1.0, cfg);
  CHECK(rep.explosion_fraction < 0.005);
  CHECK(rep.n_effective == 2000);
}

TEST_CASE("incomplete model explodes") {
  SimConfig cfg;
  cfg.n_paths = 1000;
  cfg.seed = 11;
  const auto rep = simulate_explosion(preset("exp-growth-2"), 1.0, cfg);
  CHECK(rep.explosion_fraction > 0.9);
  CHECK(rep.ci95_halfwidth > 0.0);
  CHECK(rep.dt_stable);
}

TEST_CASE("hitting Laplace transform against the Yukawa profile") {
  SimConfig cfg;
  cfg.n_paths = 2000;
  cfg.t_max = 5.0;
  cfg.r_absorb_outer = 10.0;
  cfg.seed = 5;
  const auto rep = hitting_laplace(preset("euclidean-3"), std::vector<double>{1.0, 1.5, 2.0}, 1.0, 1.0, cfg);
  REQUIRE(rep.hitting_estimates.size() == 3);
  CHECK(rep.hitting_estimates[0].estimate == 1.0);
  for (std::size_t i = 1; i < 3; ++i) {
    const auto& e = rep.hitting_estimates[i];
    const double exact = std::exp(-(e.r_start - 1.0)) / e.r_start;
    CHECK(std::abs(e.estimate - exact) <= std::max(2.0 * e.ci95, 0.02));
  }
}

TEST_CASE("non-Feller model keeps the hitting transform away from zero") {
  SimConfig cfg;
  cfg.n_paths = 400;
  cfg.t_max = 5.0;
  cfg.r_absorb_outer = 30.0;
  cfg.seed = 9;
  const auto rep = hitting_laplace(preset("exp-alpha-2-3"), 10.0, 1.0, 1.0, cfg);
  CHECK(rep.hitting_estimates[0].estimate > 0.05);
}

TEST_CASE("trace output") {
  SimConfig cfg;
  cfg.n_paths = 100;
  cfg.trace_paths = 2;
  cfg.t_max = 0.01;
  const auto rep = simulate_explosion(preset("euclidean-2"), 1.0, cfg);
  CHECK(!rep.trace.empty());
  std::ostringstream os;
  write_trace_csv(rep, os);
  CHECK(os.str().rfind("path,t,r\n", 0) == 0);
}
