#include "wml/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <vector>

#include "wml/error.hpp"

namespace wml {

bool Jet2::finite() const {
  return std::isfinite(value) && std::isfinite(d1) && std::isfinite(d2);
}

Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2}; }
Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2}; }
Jet2 operator-(const Jet2& a) { return {-a.value, -a.d1, -a.d2}; }
Jet2 operator*(double s, const Jet2& a) { return {s * a.value, s * a.d1, s * a.d2}; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  const double q = a.value / b.value;
  const double q1 = (a.d1 - q * b.d1) / b.value;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
  return {q, q1, q2};
}

namespace {

// f(u) given f, f', f'' evaluated at u.value.
Jet2 chain(const Jet2& u, double f0, double f1, double f2) {
  return {f0, f1 * u.d1, f2 * u.d1 * u.d1 + f1 * u.d2};
}

Jet2 checked(const Jet2& j, const char* what) {
  if (!j.finite()) throw DomainError(std::string("non-finite result in ") + what);
  return j;
}

// log-jet of a positive jet.
Jet2 log_of(const Jet2& v, const char* what) {
  if (!(v.value > 0.0)) throw DomainError(std::string("log of non-positive value in ") + what);
  const double l1 = v.d1 / v.value;
  return {std::log(v.value), l1, v.d2 / v.value - l1 * l1};
}

}  // namespace

Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.value);
  return chain(u, e, e, e);
}

Jet2 log(const Jet2& u) {
  if (!(u.value > 0.0)) throw DomainError("log of non-positive argument");
  const double inv = 1.0 / u.value;
  return chain(u, std::log(u.value), inv, -inv * inv);
}

Jet2 sqrt(const Jet2& u) {
  if (u.value < 0.0) throw DomainError("sqrt of negative argument");
  const double s = std::sqrt(u.value);
  if (s == 0.0) {
    if (u.d1 == 0.0 && u.d2 == 0.0) return {0.0, 0.0, 0.0};
    throw DomainError("sqrt is not differentiable at 0");
  }
  return chain(u, s, 0.5 / s, -0.25 / (s * u.value));
}

Jet2 sinh(const Jet2& u) {
  const double s = std::sinh(u.value), c = std::cosh(u.value);
  return chain(u, s, c, s);
}

Jet2 cosh(const Jet2& u) {
  const double s = std::sinh(u.value), c = std::cosh(u.value);
  return chain(u, c, s, c);
}

Jet2 tanh(const Jet2& u) {
  const double t = std::tanh(u.value);
  const double sech2 = 1.0 - t * t;
  return chain(u, t, sech2, -2.0 * t * sech2);
}

Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.value), c = std::cos(u.value);
  return chain(u, s, c, -s);
}

Jet2 cos(const Jet2& u) {
  const double s = std::sin(u.value), c = std::cos(u.value);
  return chain(u, c, -s, -c);
}

Jet2 pow(const Jet2& u, double c) {
  if (c == 0.0) return Jet2::constant(1.0);
  if (c == 1.0) return u;
  if (c == 2.0) return u * u;
  const bool integral = std::floor(c) == c;
  if (u.value < 0.0 && !integral) throw DomainError("negative base with non-integer exponent");
  if (u.value == 0.0 && c < 0.0) throw DomainError("0 raised to a negative power");
  const double p0 = std::pow(u.value, c);
  const double p1 = c * std::pow(u.value, c - 1.0);
  const double p2 = c * (c - 1.0) * std::pow(u.value, c - 2.0);
  return chain(u, p0, p1, p2);
}

const char* to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Sinh: return "sinh";
    case UnaryOp::Cosh: return "cosh";
    case UnaryOp::Tanh: return "tanh";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
  }
  return "?";
}

ExprPtr ExprNode::make_constant(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Constant;
  n->constant = c;
  return n;
}

ExprPtr ExprNode::make_variable() {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Variable;
  return n;
}

ExprPtr ExprNode::make_unary(UnaryOp op, ExprPtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Unary;
  n->unary = op;
  n->lhs = std::move(arg);
  return n;
}

ExprPtr ExprNode::make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Binary;
  n->binary = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool ExprNode::depends_on_r() const {
  switch (kind) {
    case Kind::Constant: return false;
    case Kind::Variable: return true;
    case Kind::Unary: return lhs->depends_on_r();
    case Kind::Binary: return lhs->depends_on_r() || rhs->depends_on_r();
  }
  return true;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Constant: return a.constant == b.constant;
    case ExprNode::Kind::Variable: return true;
    case ExprNode::Kind::Unary: return a.unary == b.unary && structurally_equal(*a.lhs, *b.lhs);
    case ExprNode::Kind::Binary:
      return a.binary == b.binary && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string print_expr(const ExprNode& node) {
  switch (node.kind) {
    case ExprNode::Kind::Constant: return format_number(node.constant);
    case ExprNode::Kind::Variable: return "r";
    case ExprNode::Kind::Unary:
      if (node.unary == UnaryOp::Neg) return "(-" + print_expr(*node.lhs) + ")";
      return std::string(to_string(node.unary)) + "(" + print_expr(*node.lhs) + ")";
    case ExprNode::Kind::Binary: {
      const char* op = "+";
      switch (node.binary) {
        case BinaryOp::Add: op = " + "; break;
        case BinaryOp::Sub: op = " - "; break;
        case BinaryOp::Mul: op = " * "; break;
        case BinaryOp::Div: op = " / "; break;
        case BinaryOp::Pow: op = " ^ "; break;
      }
      return "(" + print_expr(*node.lhs) + op + print_expr(*node.rhs) + ")";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Parser: recursive descent with precedence  ^  >  unary -  >  * /  >  + -
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expression");
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) fail("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::ostringstream os;
    os << "syntax error at offset " << pos_ << ": expected " << expected;
    if (pos_ < text_.size()) os << ", found '" << text_[pos_] << "'";
    else os << ", found end of input";
    throw SyntaxError(pos_, expected, os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("\"") + c + "\"");
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = ExprNode::make_binary(BinaryOp::Add, lhs, parse_product());
      else if (accept('-')) lhs = ExprNode::make_binary(BinaryOp::Sub, lhs, parse_product());
      else return lhs;
    }
  }

  ExprPtr parse_product() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = ExprNode::make_binary(BinaryOp::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = ExprNode::make_binary(BinaryOp::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return ExprNode::make_unary(UnaryOp::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // Right associative; the exponent may carry its own unary minus (r^-2).
  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (accept('^')) return ExprNode::make_binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, identifier or \"(\"");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("number, identifier or \"(\"");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      // Only an exponent if digits follow; otherwise `e` is left for the caller.
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
      pos_ = start;
      fail("number");
    }
    return ExprNode::make_constant(value);
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "r") return ExprNode::make_variable();
    if (name == "pi") return ExprNode::make_constant(std::numbers::pi);
    if (name == "e") return ExprNode::make_constant(std::numbers::e);

    static const std::pair<std::string_view, UnaryOp> functions[] = {
        {"exp", UnaryOp::Exp},   {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
        {"sinh", UnaryOp::Sinh}, {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh},
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},
    };
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        expect('(');
        ExprPtr arg = parse_sum();
        expect(')');
        return ExprNode::make_unary(op, arg);
      }
    }
    pos_ = start;
    throw Error(ErrorKind::UnknownIdentifier,
                "unknown identifier '" + std::string(name) + "' at offset " + std::to_string(start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

RadialFunction parse_expr(std::string_view text) {
  Parser parser(text);
  return RadialFunction(parser.parse(), std::string(text));
}

RadialFunction::RadialFunction(ExprPtr ast, std::string source)
    : ast_(std::move(ast)), source_(std::move(source)) {}

Jet2 RadialFunction::jet(double r) const { return eval_jet(*ast_, r); }
Jet2 RadialFunction::log_jet(double r) const { return eval_log_jet(*ast_, r); }

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Jet2 eval_jet(const ExprNode& node, double r) {
  switch (node.kind) {
    case ExprNode::Kind::Constant: return Jet2::constant(node.constant);
    case ExprNode::Kind::Variable: return Jet2::variable(r);
    case ExprNode::Kind::Unary: {
      const Jet2 u = eval_jet(*node.lhs, r);
      switch (node.unary) {
        case UnaryOp::Neg: return -u;
        case UnaryOp::Exp: return checked(exp(u), "exp");
        case UnaryOp::Log: return checked(log(u), "log");
        case UnaryOp::Sqrt: return checked(sqrt(u), "sqrt");
        case UnaryOp::Sinh: return checked(sinh(u), "sinh");
        case UnaryOp::Cosh: return checked(cosh(u), "cosh");
        case UnaryOp::Tanh: return checked(tanh(u), "tanh");
        case UnaryOp::Sin: return sin(u);
        case UnaryOp::Cos: return cos(u);
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      const Jet2 a = eval_jet(*node.lhs, r);
      if (node.binary == BinaryOp::Pow) {
        if (!node.rhs->depends_on_r()) {
          return checked(pow(a, eval_jet(*node.rhs, r).value), "^");
        }
        if (!(a.value > 0.0)) throw DomainError("^ with variable exponent needs a positive base");
        return checked(exp(eval_jet(*node.rhs, r) * log(a)), "^");
      }
      const Jet2 b = eval_jet(*node.rhs, r);
      switch (node.binary) {
        case BinaryOp::Add: return checked(a + b, "+");
        case BinaryOp::Sub: return checked(a - b, "-");
        case BinaryOp::Mul: return checked(a * b, "*");
        case BinaryOp::Div: return checked(a / b, "/");
        case BinaryOp::Pow: break;
      }
      break;
    }
  }
  throw DomainError("malformed expression tree");
}

namespace {

// log(sinh u) for u > 0 without overflow.
Jet2 log_sinh(const Jet2& u) {
  if (!(u.value > 0.0)) throw DomainError("log of non-positive sinh");
  const double x = u.value;
  const double q = std::exp(-2.0 * x);                        // e^{-2x}
  const double value = x + std::log1p(-q) - std::numbers::ln2;
  const double coth = (1.0 + q) / (1.0 - q);
  const double csch2 = 4.0 * q / ((1.0 - q) * (1.0 - q));
  if (x < 1e-4) {
    // Series near 0 avoids the cancellation in 1 - e^{-2x}.
    const double v = std::log(std::sinh(x) / x) + std::log(x);
    const double c = std::cosh(x) / std::sinh(x);
    const double s = 1.0 / (std::sinh(x) * std::sinh(x));
    return chain(u, v, c, -s);
  }
  return chain(u, value, coth, -csch2);
}

Jet2 log_cosh(const Jet2& u) {
  const double x = std::abs(u.value);
  const double q = std::exp(-2.0 * x);
  const double value = x + std::log1p(q) - std::numbers::ln2;
  const double t = std::tanh(u.value);
  return chain(u, value, t, 1.0 - t * t);
}

// log(e^A + e^B) for log-jets A, B.
Jet2 log_add(const Jet2& a, const Jet2& b) {
  const double m = std::max(a.value, b.value);
  const double wa = std::exp(a.value - m), wb = std::exp(b.value - m);
  const double s = wa + wb;
  const double pa = wa / s, pb = wb / s;
  const double l1 = pa * a.d1 + pb * b.d1;
  const double second = pa * (a.d2 + a.d1 * a.d1) + pb * (b.d2 + b.d1 * b.d1);
  return {m + std::log(s), l1, second - l1 * l1};
}

Jet2 structural_log_jet(const ExprNode& node, double r);

}  // namespace

Jet2 eval_log_jet(const ExprNode& node, double r) {
  switch (node.kind) {
    case ExprNode::Kind::Constant:
      if (!(node.constant > 0.0)) throw DomainError("log of non-positive constant");
      return Jet2::constant(std::log(node.constant));
    case ExprNode::Kind::Variable:
      if (!(r > 0.0)) throw DomainError("log of non-positive r");
      return {std::log(r), 1.0 / r, -1.0 / (r * r)};
    case ExprNode::Kind::Unary:
      switch (node.unary) {
        case UnaryOp::Exp: return checked(eval_jet(*node.lhs, r), "exp");
        case UnaryOp::Sqrt: return 0.5 * eval_log_jet(*node.lhs, r);
        case UnaryOp::Sinh: return checked(log_sinh(eval_jet(*node.lhs, r)), "sinh");
        case UnaryOp::Cosh: return checked(log_cosh(eval_jet(*node.lhs, r)), "cosh");
        default: break;
      }
      return checked(log_of(eval_jet(node, r), to_string(node.unary)), "log-jet");
    case ExprNode::Kind::Binary:
      if (node.binary != BinaryOp::Sub) {
        // Structural rules need positive operands; a positive result built from
        // negative pieces (e.g. (-r)^2) falls back to the direct value.
        try {
          return structural_log_jet(node, r);
        } catch (const DomainError&) {
        }
      }
      return checked(log_of(eval_jet(node, r), "binary"), "log-jet");
  }
  throw DomainError("malformed expression tree");
}

namespace {

Jet2 structural_log_jet(const ExprNode& node, double r) {
  {
      switch (node.binary) {
        case BinaryOp::Mul:
          return checked(eval_log_jet(*node.lhs, r) + eval_log_jet(*node.rhs, r), "*");
        case BinaryOp::Div:
          return checked(eval_log_jet(*node.lhs, r) - eval_log_jet(*node.rhs, r), "/");
        case BinaryOp::Add:
          return checked(log_add(eval_log_jet(*node.lhs, r), eval_log_jet(*node.rhs, r)), "+");
        case BinaryOp::Pow:
          if (!node.rhs->depends_on_r())
            return checked(eval_jet(*node.rhs, r).value * eval_log_jet(*node.lhs, r), "^");
          return checked(eval_jet(*node.rhs, r) * eval_log_jet(*node.lhs, r), "^");
        case BinaryOp::Sub: break;
      }
  }
  throw DomainError("no structural log rule");
}

}  // namespace

}  // namespace wml
