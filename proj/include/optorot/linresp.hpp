#pragma once

#include "optorot/params.hpp"
#include "optorot/stability.hpp"
#include "optorot/steady.hpp"

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace optorot {

/// Linearised drift matrix of the fluctuations around a steady state.
/// Ordering is (dX_1, dY_1, ..., dX_k, dY_k, dphi, dLz), one quadrature pair
/// per beam, with dX = (da + da^dag)/sqrt2 and dY = (da - da^dag)/(i sqrt2).
struct DriftMatrix {
  Eigen::MatrixXd B;
  std::vector<SteadyState> linearized_about;

  Eigen::Index phi_index() const { return B.rows() - 2; }
  Eigen::Index lz_index() const { return B.rows() - 1; }
};

/// Single-beam 4x4 drift matrix.
DriftMatrix drift_matrix(const SystemParams& sys, const SteadyState& ss);
/// Multi-beam drift matrix; the beams' intensities add in the torque.
DriftMatrix drift_matrix(const SystemParams& sys, std::span<const SteadyState> states);
/// Drift matrix at the clamped steady states of every beam in `sys`.
DriftMatrix drift_matrix(const SystemParams& sys);

inline Stability routh_hurwitz_stable(const DriftMatrix& drift) {
  return routh_hurwitz_stable(drift.B);
}

/// Optomechanical spring and damping added by one beam at frequency omega.
struct BeamContribution {
  double spring = 0.0;   // added to omega_eff^2, rad^2/s^2
  double damping = 0.0;  // added to D_eff, kg m^2/s
};

BeamContribution beam_contribution(const SystemParams& sys, const BeamDrive& beam, double omega);

struct ResponseResult {
  double eval_omega = 0.0;
  double omega_eff_sq = 0.0;
  double D_eff = 0.0;
  std::vector<BeamContribution> per_beam;
  std::vector<std::pair<double, std::complex<double>>> chi_samples;
  bool anti_trapped = false;  // omega_eff^2 <= 0
  bool anti_damped = false;   // D_eff <= 0

  /// sqrt(omega_eff^2), or 0 when anti-trapped.
  double omega_eff() const;
};

/// Effective frequency and damping with every beam held at its own detuning,
/// evaluated at `eval_omega` (defaults to omega_phi).
ResponseResult effective_params(const SystemParams& sys,
                                std::optional<double> eval_omega = std::nullopt);

/// Fixed point omega = omega_eff(omega). Falls back to the last iterate when
/// the iteration leaves the trapped region or fails to converge.
ResponseResult self_consistent_effective_params(const SystemParams& sys, int max_iterations = 200);

/// Susceptibility from the closed-form spring/damping terms, frequency
/// dependent, summed over the beams of `sys`.
std::complex<double> chi_closed_form(const SystemParams& sys, double omega);

/// Susceptibility dphi/dtau from a drift matrix: unit torque on the Lz row.
std::complex<double> chi_from_matrix(const DriftMatrix& drift, double omega);

/// Samples chi_closed_form on a grid and stores them in `result`.
void sample_chi(const SystemParams& sys, std::span<const double> omegas, ResponseResult& result);

}  // namespace optorot
