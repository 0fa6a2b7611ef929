#include "optorot/thermo.hpp"

#include "optorot/constants.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace optorot {

Thermometry effective_temperature(const SystemParams& sys, const ResponseResult& response) {
  if (response.anti_damped || !(response.D_eff > 0.0))
    throw NoStationaryState("effective_temperature: D_eff <= 0 (anti-damped)");
  if (response.anti_trapped)
    throw NoStationaryState("effective_temperature: omega_eff^2 <= 0 (anti-trapped)");
  Thermometry t;
  const double omega_eff = response.omega_eff();
  t.T_eff = sys.temperature() * sys.damping() / response.D_eff;
  t.n_quanta = si::boltzmann * t.T_eff / (si::hbar * omega_eff);
  t.variance_phi = si::boltzmann * t.T_eff / (sys.inertia() * response.omega_eff_sq);
  t.ground_state = t.n_quanta < 1.0;
  t.high_temperature = si::boltzmann * sys.temperature() / (si::hbar * omega_eff) > 10.0;
  return t;
}

EquipartitionCheck equipartition_integral_check(double inertia, double omega_eff, double D_eff) {
  if (!(D_eff > 0.0)) throw NoStationaryState("equipartition_integral_check: D_eff <= 0");
  if (!(omega_eff > 0.0) || !(inertia > 0.0))
    throw std::invalid_argument("equipartition_integral_check: non-positive I or omega_eff");

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double w0 = omega_eff;
  auto integrand = [&](double w) {
    const double spring = inertia * (w0 - w) * (w0 + w);
    return 1.0 / (spring * spring + D_eff * D_eff * w * w);
  };
  auto piece = [&](double a, double b) {
    return Quadrature::integrate(integrand, a, b, 12, 1e-10);
  };

  // |chi|^2 is even, so integrate [0, inf) outward from the resonance in
  // pieces that double in width, then double the result.
  const double half_width = D_eff / inertia;
  double total = piece(std::max(0.0, w0 - half_width), w0 + half_width);
  for (double h = half_width; w0 - h > 0.0; h *= 2.0)
    total += piece(std::max(0.0, w0 - 2.0 * h), w0 - h);
  for (double h = half_width;; h *= 2.0) {
    const double contribution = piece(w0 + h, w0 + 2.0 * h);
    total += contribution;
    if (contribution < 1e-6 * total && h > w0) break;
  }

  EquipartitionCheck check;
  check.numeric = 2.0 * total;
  check.analytic = si::pi / (inertia * w0 * w0 * D_eff);
  check.relative_error = std::abs(check.numeric - check.analytic) / check.analytic;
  return check;
}

}  // namespace optorot
