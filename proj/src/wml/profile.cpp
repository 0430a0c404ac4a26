#include "wml/profile.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "wml/error.hpp"
#include "wml/expr.hpp"

namespace wml {

namespace {

std::size_t locate(const std::vector<double>& grid, double r) {
  if (grid.size() < 2) throw DomainError("profile has fewer than two nodes");
  if (r < grid.front() || r > grid.back())
    throw DomainError("r = " + format_number(r) + " outside the profile range");
  auto it = std::upper_bound(grid.begin(), grid.end(), r);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) i = 1;
  if (i >= grid.size()) i = grid.size() - 1;
  return i - 1;
}

}  // namespace

double RadialProfile::operator()(double r) const {
  const std::size_t i = locate(grid, r);
  const double h = grid[i + 1] - grid[i];
  const double t = (r - grid[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * values[i] + h10 * h * derivative_values[i] + h01 * values[i + 1] +
         h11 * h * derivative_values[i + 1];
}

double RadialProfile::derivative(double r) const {
  const std::size_t i = locate(grid, r);
  const double h = grid[i + 1] - grid[i];
  const double t = (r - grid[i]) / h;
  const double d00 = 6 * t * t - 6 * t;
  const double d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t;
  const double d11 = 3 * t * t - 2 * t;
  return (d00 * values[i] + d01 * values[i + 1]) / h + d10 * derivative_values[i] +
         d11 * derivative_values[i + 1];
}

bool RadialProfile::check_monotone() const {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1]) return false;
  return true;
}

void RadialProfile::write_csv(std::ostream& out) const {
  out << "r,value,derivative\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << format_number(grid[i]) << ',' << format_number(values[i]) << ','
        << format_number(derivative_values[i]) << '\n';
}

template <std::size_t N>
OdeRun<N> integrate_ode(const OdeRhs<N>& rhs, OdeState<N> y0, double r0, double r1, const OdeTolerance& tol,
                        const std::function<double(double, const OdeState<N>&)>& event, double max_step) {
  namespace odeint = boost::numeric::odeint;
  using State = OdeState<N>;
  auto stepper = odeint::make_dense_output(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  const double dir = r1 >= r0 ? 1.0 : -1.0;
  const double span = std::abs(r1 - r0);
  double dt0 = std::min(1e-3 * span, 1e-4 * std::max(1.0, std::abs(r0)));
  if (r0 != 0.0) dt0 = std::min(dt0, 0.01 * std::abs(r0));
  if (max_step > 0) dt0 = std::min(dt0, max_step);
  stepper.initialize(y0, r0, dir * dt0);
  OdeRun<N> run;
  run.r.push_back(r0);
  run.y.push_back(y0);
  auto system = [&](const State& y, State& dy, double r) { rhs(y, dy, r); };
  long steps = 0;
  while (dir * (r1 - stepper.current_time()) > 0) {
    if (max_step > 0 && std::abs(stepper.current_time_step()) > max_step)
      stepper.initialize(stepper.current_state(), stepper.current_time(), dir * max_step);
    const double remaining = std::abs(r1 - stepper.current_time());
    if (std::abs(stepper.current_time_step()) > remaining)
      stepper.initialize(stepper.current_state(), stepper.current_time(), dir * remaining);
    stepper.do_step(system);
    if (++steps > 20000000) throw Error(ErrorKind::StepUnderflow, "ODE step budget exhausted");
    const double r = stepper.current_time();
    const State& y = stepper.current_state();
    for (double v : y)
      if (!std::isfinite(v))
        throw Error(ErrorKind::StepUnderflow, "ODE solution left the floating range at r = " + format_number(r));
    if (dir * (r1 - r) > 0 && std::abs(stepper.current_time_step()) < 1e-14 * std::max(1.0, std::abs(r)))
      throw Error(ErrorKind::StepUnderflow, "ODE step size underflow at r = " + format_number(r));
    if (event && event(r, y) > 0) {
      double a = stepper.previous_time(), b = r;
      State tmp;
      for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const double mid = 0.5 * (a + b);
        stepper.calc_state(mid, tmp);
        if (event(mid, tmp) > 0)
          b = mid;
        else
          a = mid;
      }
      stepper.calc_state(b, tmp);
      run.event_fired = true;
      run.r_event = b;
      run.y_event = tmp;
      State before;
      stepper.calc_state(a, before);
      if (a != run.r.back()) {
        run.r.push_back(a);
        run.y.push_back(before);
      }
      return run;
    }
    run.r.push_back(r);
    run.y.push_back(y);
  }
  return run;
}

template OdeRun<1> integrate_ode<1>(const OdeRhs<1>&, OdeState<1>, double, double, const OdeTolerance&,
                                   const std::function<double(double, const OdeState<1>&)>&, double);
template OdeRun<2> integrate_ode<2>(const OdeRhs<2>&, OdeState<2>, double, double, const OdeTolerance&,
                                   const std::function<double(double, const OdeState<2>&)>&, double);
template OdeRun<3> integrate_ode<3>(const OdeRhs<3>&, OdeState<3>, double, double, const OdeTolerance&,
                                   const std::function<double(double, const OdeState<3>&)>&, double);

}  // namespace wml
