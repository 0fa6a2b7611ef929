#include "optorot/linresp.hpp"

#include "optorot/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace optorot {

DriftMatrix drift_matrix(const SystemParams& sys, const SteadyState& ss) {
  return drift_matrix(sys, std::span<const SteadyState>(&ss, 1));
}

DriftMatrix drift_matrix(const SystemParams& sys, std::span<const SteadyState> states) {
  const Eigen::Index k = static_cast<Eigen::Index>(states.size());
  const Eigen::Index n = 2 * k + 2;
  const Eigen::Index phi = n - 2;
  const Eigen::Index lz = n - 1;
  const double g = 0.5 * sys.linewidth();
  const double xi = sys.coupling();
  const double inertia = sys.inertia();

  DriftMatrix drift{Eigen::MatrixXd::Zero(n, n), {states.begin(), states.end()}};
  auto& b = drift.B;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& s = states[static_cast<std::size_t>(j)];
    const Eigen::Index x = 2 * j;
    const Eigen::Index y = 2 * j + 1;
    b(x, x) = -g;
    b(x, y) = s.full_detuning;
    b(y, x) = -s.full_detuning;
    b(y, y) = -g;
    b(y, phi) = std::sqrt(2.0) * xi * s.a_s;
    b(lz, x) = std::sqrt(2.0) * si::hbar * xi * s.a_s;
  }
  b(phi, lz) = 1.0 / inertia;
  b(lz, phi) = -inertia * sys.omega_phi() * sys.omega_phi();
  b(lz, lz) = -sys.damping() / inertia;
  return drift;
}

DriftMatrix drift_matrix(const SystemParams& sys) {
  const auto states = clamped_states(sys);
  return drift_matrix(sys, std::span<const SteadyState>(states));
}

BeamContribution beam_contribution(const SystemParams& sys, const BeamDrive& beam, double omega) {
  const double gamma = sys.linewidth();
  const double g2 = 0.25 * gamma * gamma;
  const double xi = sys.coupling();
  const double delta = beam.detuning;
  const double prefactor =
      2.0 * xi * xi * gamma * beam.input_power / sys.omega_c() * delta / (delta * delta + g2);
  const double lower = omega - delta;
  const double upper = omega + delta;
  const double denominator = (g2 + lower * lower) * (g2 + upper * upper);
  BeamContribution c;
  c.spring = -prefactor / sys.inertia() * (g2 - (omega * omega - delta * delta)) / denominator;
  c.damping = prefactor * gamma / denominator;
  return c;
}

double ResponseResult::omega_eff() const {
  return omega_eff_sq > 0.0 ? std::sqrt(omega_eff_sq) : 0.0;
}

ResponseResult effective_params(const SystemParams& sys, std::optional<double> eval_omega) {
  ResponseResult r;
  r.eval_omega = eval_omega.value_or(sys.omega_phi());
  r.omega_eff_sq = sys.omega_phi() * sys.omega_phi();
  r.D_eff = sys.damping();
  for (const auto& beam : sys.beams()) {
    const auto c = beam_contribution(sys, beam, r.eval_omega);
    r.omega_eff_sq += c.spring;
    r.D_eff += c.damping;
    r.per_beam.push_back(c);
  }
  r.anti_trapped = !(r.omega_eff_sq > 0.0);
  r.anti_damped = !(r.D_eff > 0.0);
  return r;
}

ResponseResult self_consistent_effective_params(const SystemParams& sys, int max_iterations) {
  auto r = effective_params(sys);
  for (int it = 0; it < max_iterations && !r.anti_trapped; ++it) {
    const double next = r.omega_eff();
    if (std::abs(next - r.eval_omega) <= 1e-13 * next) break;
    r = effective_params(sys, next);
  }
  return r;
}

std::complex<double> chi_closed_form(const SystemParams& sys, double omega) {
  double omega_eff_sq = sys.omega_phi() * sys.omega_phi();
  double damping = sys.damping();
  for (const auto& beam : sys.beams()) {
    const auto c = beam_contribution(sys, beam, omega);
    omega_eff_sq += c.spring;
    damping += c.damping;
  }
  const std::complex<double> inverse(sys.inertia() * (omega_eff_sq - omega * omega),
                                     -damping * omega);
  if (inverse == 0.0) throw std::domain_error("chi_closed_form: pole at this frequency");
  return 1.0 / inverse;
}

std::complex<double> chi_from_matrix(const DriftMatrix& drift, double omega) {
  return transfer_function(drift.B, drift.lz_index(), drift.phi_index(), omega);
}

void sample_chi(const SystemParams& sys, std::span<const double> omegas, ResponseResult& result) {
  result.chi_samples.clear();
  result.chi_samples.reserve(omegas.size());
  for (double w : omegas) result.chi_samples.emplace_back(w, chi_closed_form(sys, w));
}

}  // namespace optorot
