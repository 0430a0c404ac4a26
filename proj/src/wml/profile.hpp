#pragma once

// Tabulated radial solutions and the ODE driver shared by the solvers.

#include <array>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace wml {

class RadialProfile {
 public:
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> derivative_values;
  std::string bc_meta;
  bool converged = true;
  std::vector<double> history;  // sup-norm change per exhaustion stage
  bool monotone_decreasing = false;

  std::size_t size() const { return grid.size(); }
  double r_lo() const { return grid.front(); }
  double r_hi() const { return grid.back(); }

  /// Cubic Hermite interpolation through (value, derivative) at the nodes.
  double operator()(double r) const;
  double derivative(double r) const;

  /// Verifies the monotone flag against the stored nodes.
  bool check_monotone() const;

  void write_csv(std::ostream& out) const;
};

struct OdeTolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
using OdeRhs = std::function<void(const OdeState<N>&, OdeState<N>&, double)>;

template <std::size_t N>
struct OdeRun {
  std::vector<double> r;
  std::vector<OdeState<N>> y;
  bool event_fired = false;
  double r_event = 0.0;
  OdeState<N> y_event{};
};

/// Adaptive dopri5 from r0 toward r1 (either direction), recording every
/// accepted step. When `event` is given the run stops at the first point where
/// it becomes positive; the location is refined by bisection on the dense output.
template <std::size_t N>
OdeRun<N> integrate_ode(const OdeRhs<N>& rhs, OdeState<N> y0, double r0, double r1, const OdeTolerance& tol,
                        const std::function<double(double, const OdeState<N>&)>& event = {},
                        double max_step = 0.0);

extern template OdeRun<1> integrate_ode<1>(const OdeRhs<1>&, OdeState<1>, double, double, const OdeTolerance&,
                                          const std::function<double(double, const OdeState<1>&)>&, double);
extern template OdeRun<2> integrate_ode<2>(const OdeRhs<2>&, OdeState<2>, double, double, const OdeTolerance&,
                                          const std::function<double(double, const OdeState<2>&)>&, double);
extern template OdeRun<3> integrate_ode<3>(const OdeRhs<3>&, OdeState<3>, double, double, const OdeTolerance&,
                                          const std::function<double(double, const OdeState<3>&)>&, double);

}  // namespace wml
