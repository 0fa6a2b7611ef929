#pragma once

#include "optorot/linresp.hpp"
#include "optorot/params.hpp"
#include "optorot/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace optorot {

enum class Scheme {
  full_cavity,  // intracavity fields integrated explicitly
  adiabatic,    // fields slaved to the angle with first-order retardation
};

const char* to_string(Scheme s);
/// Adiabatic when linewidth > 1e3 omega_phi, otherwise full cavity.
Scheme recommended_scheme(const SystemParams& sys);

/// max(omega_phi, omega_eff): the optical spring can stiffen the mode far
/// beyond its bare frequency, and both the adiabatic step limit and the
/// recording rate follow the faster one.
double mechanical_rate(const SystemParams& sys);

struct SimConfig {
  double dt = 0.0;        // s
  double duration = 0.0;  // s, including burn-in
  int n_trajectories = 1;
  std::uint64_t rng_seed = 0;
  Scheme scheme = Scheme::full_cavity;
  bool include_field_vacuum_noise = false;
  bool thermal_noise = true;    // false runs the noiseless (T = 0) dynamics
  bool allow_unstable = false;  // skip the Routh-Hurwitz precondition
  double initial_phi_offset = 0.0;  // rad, added to the steady angle
  int samples_per_period = 16;      // recording rate, per 2 pi / mechanical_rate
  bool record_fields = false;       // also keep Re a_j, Im a_j columns
  std::optional<double> burn_in;    // s; default 10 ring-down times I / D_eff
};

/// Validates dt against the scheme limits (full cavity: 0.1 / linewidth;
/// adiabatic: 0.01 periods of mechanical_rate). Throws std::invalid_argument.
void validate(const SimConfig& cfg, const SystemParams& sys);

/// Raised when a trajectory leaves the small-angle regime (|phi| > 2 pi).
class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  /// Decimated samples: columns phi, Lz, then (Re a_j, Im a_j) per beam
  /// when fields are recorded.
  Eigen::MatrixXd samples;
  double mean_phi = 0.0;
  double var_phi = 0.0;  // stationary segment only
  double max_abs_dphi = 0.0;
};

struct TrajectoryEnsemble {
  Eigen::VectorXd time;
  double sample_dt = 0.0;
  Eigen::Index burn_in_samples = 0;
  std::vector<Trajectory> trajectories;
  double phi_s = 0.0;  // linearisation point
  double mean_phi = 0.0;
  double var_phi = 0.0;
  double var_phi_stderr = 0.0;
  double max_abs_dphi = 0.0;
  double omega_eff_sq = 0.0;  // reference curvature used for T_eff_sim
  double T_eff_sim = 0.0;
  double T_eff_sim_stderr = 0.0;
  double inertia = 0.0;

  Eigen::Index stationary_samples() const { return time.size() - burn_in_samples; }
};

/// Integrates the nonlinear Langevin equations with white thermal torque
/// noise of strength 2 D k_B T. Every beam drives its own intracavity field
/// with the detuning held by static feedback at the beam's value.
TrajectoryEnsemble simulate(const SystemParams& sys, const SimConfig& cfg);

/// Ensemble-averaged one-sided spectrum of dphi over the stationary segment.
Spectrum psd_estimate(const TrajectoryEnsemble& ensemble, std::size_t segment_length);

}  // namespace optorot
