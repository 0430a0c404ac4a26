#include "wml/manifold.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wml/error.hpp"
#include "wml/quadrature.hpp"

namespace wml {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::UnknownPreset, "bad numeric field in " + what);
  return value;
}

int parse_dimension(std::string_view text) {
  int m = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), m);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("dimension must be an integer, got '" + std::string(text) + "'");
  return m;
}

}  // namespace

KeyValueDoc parse_key_values(std::string_view text) {
  KeyValueDoc doc;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (!value.empty() && (value.front() == '"' || value.back() == '"'))
      throw ValidationError("line " + std::to_string(line_no) + ": unbalanced quote");
    if (key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty key");
    if (doc.count(key)) throw ValidationError("duplicate key '" + key + "'");
    doc.emplace(key, std::string(value));
  }
  return doc;
}

ModelManifold::ModelManifold(int dimension, RadialFunction warp, RadialFunction weight,
                             std::string label)
    : dimension_(dimension), warp_(std::move(warp)), weight_(std::move(weight)),
      label_(std::move(label)) {
  if (dimension_ < 2) throw ValidationError("dimension must be >= 2");
  if (!warp_.ast_ptr()) throw ValidationError("missing warping function g");
  if (!weight_.ast_ptr()) weight_ = parse_expr("0");
  constexpr double r0 = 1e-4;
  try {
    const Jet2 g0 = warp_.jet(r0);
    if (!(std::abs(g0.value) < 1e-3))
      throw ValidationError("g(0+) must vanish: g(1e-4) = " + format_number(g0.value));
    if (!(std::abs(g0.d1 - 1.0) < 1e-3))
      throw ValidationError("g'(0+) must equal 1: g'(1e-4) = " + format_number(g0.d1));
  } catch (const DomainError& e) {
    throw ValidationError(std::string("g is not evaluable near 0: ") + e.what());
  }
  // g > 0 and f finite on a log grid over [1e-4, 100].
  for (int i = 0; i <= 240; ++i) {
    const double r = r0 * std::pow(10.0, i / 40.0);
    try {
      const Jet2 lg = warp_.log_jet(r);
      if (!lg.finite()) throw DomainError("non-finite");
    } catch (const DomainError&) {
      throw ValidationError("g must be positive for r > 0; fails at r = " + format_number(r));
    }
    try {
      if (!weight_.jet(r).finite()) throw DomainError("non-finite");
    } catch (const DomainError&) {
      throw ValidationError("f must be finite for r > 0; fails at r = " + format_number(r));
    }
  }
}

Jet2 ModelManifold::log_density_jet(double r, std::optional<double> exponent) const {
  const double n = exponent.value_or(static_cast<double>(dimension_));
  const Jet2 lg = warp_.log_jet(r);
  const Jet2 f = weight_.jet(r);
  Jet2 out = (n - 1.0) * lg - f;
  if (!out.finite()) throw DomainError("log density is not finite at r = " + format_number(r));
  return out;
}

double ModelManifold::area_density(double r) const {
  const double la = log_area_density(r);
  if (la > 709.0 || la < -745.0)
    throw Error(ErrorKind::Overflow, "area density leaves the double range at r = " +
                                         format_number(r) + " (log a = " + format_number(la) + ")");
  return std::exp(la);
}

double ModelManifold::sphere_area() const {
  const double h = 0.5 * dimension_;
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double ModelManifold::log_weighted_ball_volume(double radius) const {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  auto log_a = [this](double r) { return log_area_density(r); };
  // Dyadic breakpoints toward 0 resolve the r^{m-1} behaviour at the pole.
  std::vector<double> bp = {0.0};
  for (int j = -30; std::ldexp(radius, j) < radius; ++j) bp.push_back(std::ldexp(radius, j));
  bp.push_back(radius);
  const LogQuadResult q = log_integrate(log_a, bp, 1e-9, 20000);
  if (!q.converged)
    throw Error(ErrorKind::Quadrature, "ball volume not resolved to 1e-9 at R = " + format_number(radius));
  return std::log(sphere_area()) + q.log_value;
}

double ModelManifold::weighted_ball_volume(double radius) const {
  const double lv = log_weighted_ball_volume(radius);
  if (lv > 709.0) throw Error(ErrorKind::Overflow, "ball volume overflows; use the log form");
  return std::exp(lv);
}

RicciF ModelManifold::ricci_f(double r) const {
  const Jet2 g = warp_.jet(r);
  const Jet2 f = weight_.jet(r);
  const double m = dimension_;
  RicciF out;
  out.radial = -(m - 1.0) * g.d2 / g.value + f.d2;
  out.tangential = -g.d2 / g.value + (m - 2.0) * (1.0 - g.d1 * g.d1) / (g.value * g.value) +
                   f.d1 * g.d1 / g.value;
  return out;
}

ModelManifold ModelManifold::with_weight_shift(double shift) const {
  auto ast = ExprNode::make_binary(BinaryOp::Add, weight_.ast_ptr(), ExprNode::make_constant(shift));
  return ModelManifold(dimension_, warp_, RadialFunction(ast, print_expr(*ast)), label_);
}

ModelManifold load_manifold(const KeyValueDoc& doc) {
  for (const auto& [key, value] : doc) {
    if (key != "dimension" && key != "g" && key != "f" && key != "label")
      throw ValidationError("unknown key '" + key + "'");
  }
  const auto dim = doc.find("dimension");
  if (dim == doc.end()) throw ValidationError("missing key 'dimension'");
  const auto g = doc.find("g");
  if (g == doc.end()) throw ValidationError("missing key 'g'");
  const auto f = doc.find("f");
  const auto label = doc.find("label");
  return ModelManifold(parse_dimension(dim->second), parse_expr(g->second),
                       parse_expr(f == doc.end() ? "0" : f->second),
                       label == doc.end() ? std::string{} : label->second);
}

ModelManifold load_manifold_text(std::string_view text) { return load_manifold(parse_key_values(text)); }

ModelManifold load_manifold_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot read manifold file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_manifold_text(ss.str());
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

struct PresetName {
  std::string family;
  int dimension = 0;
  std::optional<double> parameter;
};

PresetName split_preset(std::string_view name) {
  static const char* families[] = {"gaussian-shrinker", "steady-flat", "exp-growth", "exp-alpha",
                                   "euclidean", "hyperbolic"};
  for (const char* fam : families) {
    const std::string_view f(fam);
    if (name.size() <= f.size() + 1 || name.substr(0, f.size()) != f || name[f.size()] != '-') continue;
    std::string_view rest = name.substr(f.size() + 1);
    const auto dash = rest.find('-');
    PresetName out{std::string(f), 0, std::nullopt};
    const std::string_view dim_text = rest.substr(0, dash);
    const auto res = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), out.dimension);
    if (res.ec != std::errc() || res.ptr != dim_text.data() + dim_text.size())
      throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
    if (dash != std::string_view::npos)
      out.parameter = parse_double(rest.substr(dash + 1), "preset '" + std::string(name) + "'");
    const bool wants_param = out.family == "exp-alpha" || out.family == "gaussian-shrinker";
    if (wants_param != out.parameter.has_value())
      throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
    return out;
  }
  throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

}  // namespace

ModelManifold preset(std::string_view name) {
  const PresetName p = split_preset(name);
  const std::string label(name);
  if (p.dimension < 2) throw Error(ErrorKind::UnknownPreset, "preset dimension must be >= 2");
  if (p.family == "euclidean" || p.family == "steady-flat")
    return ModelManifold(p.dimension, parse_expr("r"), parse_expr("0"), label);
  if (p.family == "hyperbolic")
    return ModelManifold(p.dimension, parse_expr("sinh(r)"), parse_expr("0"), label);
  if (p.family == "exp-growth")
    return ModelManifold(p.dimension, parse_expr("r*exp(r^3)"), parse_expr("0"), label);
  if (p.family == "exp-alpha") {
    const double alpha = *p.parameter;
    if (!(alpha > 0.0)) throw Error(ErrorKind::UnknownPreset, "exp-alpha needs alpha > 0");
    // Smooth at the pole and equal to a constant times r e^{-r^alpha} for r >> 1.
    const std::string g = "r*exp(1-(1+r^2)^(" + format_number(alpha / 2.0) + "))";
    return ModelManifold(p.dimension, parse_expr(g), parse_expr("0"), label);
  }
  if (p.family == "gaussian-shrinker") {
    const double lambda = *p.parameter;
    if (!(lambda > 0.0)) throw Error(ErrorKind::UnknownPreset, "gaussian-shrinker needs lambda > 0");
    const std::string f = format_number(lambda / 2.0) + "*r^2";
    return ModelManifold(p.dimension, parse_expr("r"), parse_expr(f), label);
  }
  throw Error(ErrorKind::UnknownPreset, "unknown preset '" + label + "'");
}

bool is_soliton_preset(std::string_view name) {
  try {
    const PresetName p = split_preset(name);
    return p.family == "gaussian-shrinker" || p.family == "steady-flat";
  } catch (const Error&) {
    return false;
  }
}

SolitonPreset soliton_preset(std::string_view name) {
  if (!is_soliton_preset(name))
    throw Error(ErrorKind::UnknownPreset, "'" + std::string(name) + "' is not a soliton preset");
  const PresetName p = split_preset(name);
  const double lambda = p.family == "gaussian-shrinker" ? *p.parameter : 0.0;
  // Both families are flat, so S and |Ric|^2 vanish identically.
  return SolitonPreset{preset(name), lambda, parse_expr("0"), parse_expr("0")};
}

std::vector<std::string> preset_catalog() {
  return {"euclidean-2",     "euclidean-3",     "hyperbolic-2",  "hyperbolic-3",
          "exp-alpha-2-1",   "exp-alpha-2-2",   "exp-alpha-2-3", "exp-alpha-3-3",
          "exp-growth-2",    "gaussian-shrinker-2-0.5", "gaussian-shrinker-3-1",
          "steady-flat-3"};
}

}  // namespace wml
