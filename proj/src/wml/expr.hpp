#pragma once

// Closed-form radial functions of the variable `r`, evaluated together with
// their first two derivatives by forward-mode jet arithmetic.

#include <memory>
#include <string>
#include <string_view>

namespace wml {

/// Value and first two derivatives of a scalar function at a point.
struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  static constexpr Jet2 constant(double c) { return {c, 0.0, 0.0}; }
  static constexpr Jet2 variable(double x) { return {x, 1.0, 0.0}; }

  bool finite() const;
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator/(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, const Jet2& a);

// Elementary functions lifted to jets. Domain violations throw DomainError.
Jet2 exp(const Jet2& u);
Jet2 log(const Jet2& u);
Jet2 sqrt(const Jet2& u);
Jet2 sinh(const Jet2& u);
Jet2 cosh(const Jet2& u);
Jet2 tanh(const Jet2& u);
Jet2 sin(const Jet2& u);
Jet2 cos(const Jet2& u);
Jet2 pow(const Jet2& u, double c);

enum class UnaryOp { Neg, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Sin, Cos };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

const char* to_string(UnaryOp op);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Constant, Variable, Unary, Binary };

  Kind kind = Kind::Constant;
  double constant = 0.0;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  ExprPtr lhs;  // operand of unary nodes
  ExprPtr rhs;

  static ExprPtr make_constant(double c);
  static ExprPtr make_variable();
  static ExprPtr make_unary(UnaryOp op, ExprPtr arg);
  static ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b);

  bool depends_on_r() const;
};

bool structurally_equal(const ExprNode& a, const ExprNode& b);

/// Fully parenthesised canonical text; parses back to an identical tree.
std::string print_expr(const ExprNode& node);

/// Parsed radial function. Immutable and cheap to copy.
class RadialFunction {
 public:
  RadialFunction() = default;
  RadialFunction(ExprPtr ast, std::string source);

  const ExprNode& ast() const { return *ast_; }
  const ExprPtr& ast_ptr() const { return ast_; }
  const std::string& source() const { return source_; }
  std::string canonical() const { return print_expr(*ast_); }

  Jet2 jet(double r) const;
  double operator()(double r) const { return jet(r).value; }

  /// Jet of log(fn) computed structurally (products, quotients, exp, powers,
  /// sinh/cosh) so functions such as r*exp(r^3) stay representable far past
  /// the point where their value overflows. Requires fn(r) > 0.
  Jet2 log_jet(double r) const;

 private:
  ExprPtr ast_;
  std::string source_;
};

/// Parses an expression in `r`. Throws SyntaxError or Error(UnknownIdentifier).
RadialFunction parse_expr(std::string_view text);

Jet2 eval_jet(const ExprNode& node, double r);
Jet2 eval_log_jet(const ExprNode& node, double r);
inline Jet2 eval_jet(const RadialFunction& fn, double r) { return fn.jet(r); }

/// Formats a double so that parse_expr reads back the identical value.
std::string format_number(double x);

}  // namespace wml
