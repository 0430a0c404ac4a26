#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "wml/error.hpp"
#include "wml/report.hpp"
#include "wml/reproduce.hpp"

using namespace wml;

namespace {

// serialize -> text -> parse -> serialize must be the identity.
void check_round_trip(const Json& j) {
  const std::string text = j.dump();
  const Json back = Json::parse(text);
  CHECK(back == j);
  CHECK(back.dump() == text);
}

}  // namespace

TEST_CASE("numbers round trip exactly") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 9.869604401089358, 1e-300, 5e-324, 1.7976931348623157e308, -2.5}) {
    const Json j = Json::parse(number_json(v).dump());
    CHECK(number_from_json(j) == v);
  }
  CHECK(number_json(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(number_json(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isnan(number_from_json(number_json(std::nan("")))));
  CHECK(std::isinf(number_from_json(Json("inf"))));
  CHECK_THROWS_AS(number_from_json(Json("infinity")), ValidationError);
  CHECK_THROWS_AS(number_from_json(Json(true)), ValidationError);
}

TEST_CASE("module results serialize losslessly") {
  const auto M = preset("hyperbolic-2");
  check_round_trip(to_json(M));
  check_round_trip(to_json(stochastic_completeness(M)));
  check_round_trip(to_json(feller(preset("exp-alpha-2-3"))));
  check_round_trip(to_json(brooks_bound(M)));
  const auto ball = lambda1_interval(preset("euclidean-3"), 0.0, 1.0);
  const Json jb = to_json(ball);
  check_round_trip(jb);
  CHECK(Json::parse(jb.dump())["lambda1"].get<double>() == ball.lambda1);
  check_round_trip(to_json(ess_spectrum_bottom(M, {1.0, 2.0})));
  check_round_trip(to_json(half_drift_squared_bound(M, 1.0)));
  check_round_trip(to_json(barta_vector_bound(M, parse_expr("r"), 0.0, kInfinity)));
  SimConfig cfg;
  cfg.n_paths = 100;
  check_round_trip(to_json(cfg));
  check_round_trip(to_json(simulate_explosion(M, 1.0, cfg)));
  check_round_trip(to_json(minimal_exterior_solution(preset("euclidean-3"), 1.0, 1.0)));
  check_round_trip(to_json(heat_mass_doubling(preset("euclidean-3"), 1.0, 0.1, 8.0, 1)));
  check_round_trip(to_json(audit_soliton(soliton_preset("gaussian-shrinker-3-1"))));
}

TEST_CASE("non-finite values survive as strings") {
  const auto b = barta_vector_bound(preset("euclidean-3"), parse_expr("r"), 0.0, kInfinity);
  const Json j = to_json(b);
  check_round_trip(j);
  CHECK(std::isfinite(number_from_json(j["value"])) == std::isfinite(b.value));
}

TEST_CASE("simulation payload omits the worker count") {
  SimConfig cfg;
  cfg.n_paths = 100;
  cfg.threads = 2;
  const Json j = to_json(simulate_explosion(preset("euclidean-2"), 1.0, cfg));
  CHECK(!j.contains("threads_used"));
  CHECK(!to_json(cfg).contains("threads"));
}

TEST_CASE("reproduction ids") {
  CHECK(reproduction_ids().size() == 4);
  CHECK_THROWS_AS(reproduce("bogus"), Error);
  const auto r = reproduce("feller-alpha-table");
  CHECK(r.rows.size() == 12);
  CHECK(r.all_pass());
  const Json j = r.to_json();
  check_round_trip(j);
  CHECK(j["passed"] == 12);
}
