#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "wml/error.hpp"
#include "wml/expr.hpp"

using namespace wml;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

// Random smooth expressions that stay finite and positive-argument-safe on (0.1, 10).
ExprPtr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  switch (pick(rng)) {
    case 0: return ExprNode::make_constant(std::round(coef(rng) * 8) / 8);
    case 1: return ExprNode::make_variable();
    case 2: return ExprNode::make_binary(BinaryOp::Add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return ExprNode::make_binary(BinaryOp::Mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return ExprNode::make_unary(UnaryOp::Sin, random_tree(rng, depth - 1));
    case 5: return ExprNode::make_unary(UnaryOp::Tanh, random_tree(rng, depth - 1));
    case 6:
      return ExprNode::make_unary(UnaryOp::Sqrt, ExprNode::make_binary(BinaryOp::Add, ExprNode::make_constant(1.0),
                                                                       ExprNode::make_binary(BinaryOp::Mul, ExprNode::make_variable(), ExprNode::make_variable())));
    default:
      return ExprNode::make_binary(BinaryOp::Sub, random_tree(rng, depth - 1), ExprNode::make_unary(UnaryOp::Neg, random_tree(rng, depth - 1)));
  }
}

}  // namespace

TEST_CASE("grammar shapes") {
  const auto s = parse_expr("sinh(r)");
  REQUIRE(s.ast().kind == ExprNode::Kind::Unary);
  CHECK(s.ast().unary == UnaryOp::Sinh);
  CHECK(s.ast().lhs->kind == ExprNode::Kind::Variable);

  const auto e = parse_expr("exp(-r^3)");
  REQUIRE(e.ast().unary == UnaryOp::Exp);
  const auto& neg = *e.ast().lhs;
  REQUIRE(neg.kind == ExprNode::Kind::Unary);
  CHECK(neg.unary == UnaryOp::Neg);
  REQUIRE(neg.lhs->kind == ExprNode::Kind::Binary);
  CHECK(neg.lhs->binary == BinaryOp::Pow);
  CHECK(neg.lhs->lhs->kind == ExprNode::Kind::Variable);
  CHECK(neg.lhs->rhs->constant == 3.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_expr("2^3^2")(0.0) == doctest::Approx(512.0));
  CHECK(parse_expr("-2^2")(0.0) == doctest::Approx(-4.0));
  CHECK(parse_expr("1-2-3")(0.0) == doctest::Approx(-4.0));
  CHECK(parse_expr("8/4/2")(0.0) == doctest::Approx(1.0));
  CHECK(parse_expr("1+2*3")(0.0) == doctest::Approx(7.0));
  CHECK(parse_expr("pi")(0.0) == doctest::Approx(M_PI));
  CHECK(parse_expr("e")(0.0) == doctest::Approx(M_E));
  CHECK(parse_expr("1.5e-3*r")(2.0) == doctest::Approx(3e-3));
  CHECK(parse_expr("2*e*r")(1.0) == doctest::Approx(2 * M_E));
}

TEST_CASE("syntax errors carry offset and expected token") {
  try {
    parse_expr("r*log(r");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& err) {
    CHECK(err.offset() == 7);
    CHECK(err.expected().find(')') != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("r +"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(r))"), SyntaxError);
  try {
    parse_expr("foo(r)");
    FAIL("expected unknown identifier");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::UnknownIdentifier);
  }
}

TEST_CASE("sinh jet against a 50-digit oracle") {
  const Big one(1);
  const double s = static_cast<double>(sinh(one));
  const double c = static_cast<double>(cosh(one));
  const Jet2 j = parse_expr("sinh(r)").jet(1.0);
  CHECK(close(j.value, s, 1e-15));
  CHECK(close(j.d1, c, 1e-15));
  CHECK(close(j.d2, s, 1e-15));
  CHECK(j.value == doctest::Approx(1.1752012).epsilon(1e-7));
  CHECK(j.d1 == doctest::Approx(1.5430806).epsilon(1e-7));
}

TEST_CASE("polynomial jet") {
  const Jet2 j = parse_expr("r^2").jet(3.0);
  CHECK(j.value == 9.0);
  CHECK(j.d1 == 6.0);
  CHECK(j.d2 == 2.0);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(parse_expr("log(r)").jet(0.0), DomainError);
  CHECK_THROWS_AS(parse_expr("sqrt(r)").jet(-1.0), DomainError);
  CHECK_THROWS_AS(parse_expr("r^(-1)").jet(0.0), DomainError);
  CHECK_THROWS_AS(parse_expr("(r-2)^r").jet(1.0), DomainError);
  CHECK_THROWS_AS(parse_expr("exp(exp(r))").jet(10.0), DomainError);
  CHECK(parse_expr("r^r").jet(2.0).value == doctest::Approx(4.0));
  CHECK(parse_expr("(-r)^2").jet(3.0).value == doctest::Approx(9.0));
}

TEST_CASE("product rule on random trees") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> rdist(0.1, 10.0);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_tree(rng, 3);
    const auto b = random_tree(rng, 3);
    const auto prod = ExprNode::make_binary(BinaryOp::Mul, a, b);
    const double r = rdist(rng);
    const Jet2 ja = eval_jet(*a, r), jb = eval_jet(*b, r), jp = eval_jet(*prod, r);
    const double expect = ja.d1 * jb.value + ja.value * jb.d1;
    const double scale = std::abs(ja.d1 * jb.value) + std::abs(ja.value * jb.d1) + 1e-300;
    CHECK(std::abs(jp.d1 - expect) <= 1e-12 * scale);
  }
}

TEST_CASE("jets agree with central differences") {
  const char* fns[] = {"sinh(r)*exp(-r/3)", "log(1+r^2)", "r^2.5", "tanh(r)/(1+r)", "cos(r)^2+sqrt(r)",
                       "r*exp(1-(1+r^2)^1.5)", "r^r"};
  const double h = 1e-5;
  for (const char* text : fns) {
    const auto fn = parse_expr(text);
    for (double r : {0.5, 1.3, 2.7}) {
      const Jet2 j = fn.jet(r);
      const double fd1 = (fn(r + h) - fn(r - h)) / (2 * h);
      const Jet2 jp = fn.jet(r + h), jm = fn.jet(r - h);
      const double fd2 = (jp.d1 - jm.d1) / (2 * h);
      CHECK(close(fd1, j.d1, 1e-6));
      CHECK(close(fd2, j.d2, 1e-6));
    }
  }
}

TEST_CASE("print/parse round trip is the identity") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 300; ++t) {
    const auto tree = random_tree(rng, 4);
    const std::string text = print_expr(*tree);
    const auto back = parse_expr(text);
    CHECK(structurally_equal(back.ast(), *tree));
    CHECK(back.canonical() == text);
  }
  for (const char* text : {"exp(-r^3)", "-r^-2", "2^3^2", "r*exp(r^3)", "1e-300*r", "0.1+r"}) {
    const auto fn = parse_expr(text);
    const auto again = parse_expr(fn.canonical());
    CHECK(structurally_equal(fn.ast(), again.ast()));
  }
}

TEST_CASE("log jets stay finite past overflow") {
  const auto g = parse_expr("r*exp(r^3)");
  const Jet2 lj = g.log_jet(20.0);
  CHECK(lj.value == doctest::Approx(std::log(20.0) + 8000.0));
  CHECK(lj.d1 == doctest::Approx(1.0 / 20 + 3 * 400.0));
  CHECK(lj.d2 == doctest::Approx(-1.0 / 400 + 6 * 20.0));
  const Jet2 ls = parse_expr("sinh(r)").log_jet(1000.0);
  CHECK(ls.value == doctest::Approx(1000.0 - std::log(2.0)));
  CHECK(ls.d1 == doctest::Approx(1.0));
  const Jet2 small = parse_expr("sinh(r)").log_jet(1e-6);
  CHECK(small.value == doctest::Approx(std::log(1e-6)));
  CHECK(small.d1 == doctest::Approx(1e6));
  // Agreement with the direct log where both are representable.
  for (const char* text : {"r*exp(-r^2)", "sinh(r)^2", "sqrt(r)*cosh(r)", "r+r^2", "(-r)^2"}) {
    const auto fn = parse_expr(text);
    const Jet2 direct = fn.jet(1.7);
    const Jet2 l = fn.log_jet(1.7);
    CHECK(close(l.value, std::log(direct.value), 1e-13));
    CHECK(close(l.d1, direct.d1 / direct.value, 1e-12));
  }
}
