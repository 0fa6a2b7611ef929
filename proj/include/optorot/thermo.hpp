#pragma once

#include "optorot/linresp.hpp"
#include "optorot/params.hpp"

#include <stdexcept>

namespace optorot {

/// No stationary temperature exists: the mode is anti-damped or anti-trapped.
class NoStationaryState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Thermometry {
  double T_eff = 0.0;         // K
  double n_quanta = 0.0;      // k_B T_eff / (hbar omega_eff), no zero-point term
  double variance_phi = 0.0;  // rad^2
  bool ground_state = false;  // n < 1
  bool high_temperature = false;  // k_B T / (hbar omega_eff) > 10
};

/// T_eff = T D_phi / D_eff, n = k_B T_eff / (hbar omega_eff) and the
/// equipartition angle variance k_B T_eff / (I omega_eff^2).
Thermometry effective_temperature(const SystemParams& sys, const ResponseResult& response);

struct EquipartitionCheck {
  double numeric = 0.0;   // quadrature of |chi|^2 over the real line
  double analytic = 0.0;  // pi / (I omega_eff^2 D_eff)
  double relative_error = 0.0;
};

/// Integrates |chi(omega)|^2 of the frozen-coefficient Lorentzian by adaptive
/// Gauss-Kronrod quadrature and compares with the closed form.
EquipartitionCheck equipartition_integral_check(double inertia, double omega_eff, double D_eff);

}  // namespace optorot
