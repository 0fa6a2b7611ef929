#pragma once

#include "optorot/params.hpp"

#include <optional>
#include <vector>

namespace optorot {

/// One self-consistent stationary point of the driven cavity + rotor.
/// The input phase is chosen so that a_s is real and non-negative.
struct SteadyState {
  double a_s = 0.0;            // sqrt(photon number)
  double phi_s = 0.0;          // rad
  double Lz_s = 0.0;           // always zero
  double intensity = 0.0;      // a_s^2
  double full_detuning = 0.0;  // delta - xi phi_s, rad/s
  int branch_index = 0;
  double residual_amplitude = 0.0;  // relative residual of the amplitude relation
  double residual_angle = 0.0;      // relative residual of the torque balance
};

/// |a_in|^2 = P_in / (hbar omega_c), photons per second.
double input_photon_flux(const SystemParams& sys, const BeamDrive& beam);

/// hbar xi^2 / (I omega_phi^2): detuning shift per intracavity photon.
double detuning_pull(const SystemParams& sys);

/// All real non-negative stationary branches without feedback, ascending in
/// photon number. `beam.detuning` is read as the bare detuning delta.
std::vector<SteadyState> steady_states(const SystemParams& sys, const BeamDrive& beam);

struct BistabilityReport {
  bool bistable = false;
  int branch_count = 1;
  bool marginal = false;  // a double root is present
};

BistabilityReport is_bistable(const SystemParams& sys, const BeamDrive& beam);

/// Range of input power over which three branches coexist at the beam's bare
/// detuning, or nullopt when the detuning never allows bistability.
struct PowerWindow {
  double lower = 0.0;  // W
  double upper = 0.0;  // W
};
std::optional<PowerWindow> bistability_window(const SystemParams& sys, const BeamDrive& beam);

/// Static-feedback steady state: the full detuning is held at the target,
/// so the photon number is the bare Lorentzian value.
SteadyState clamped_detuning_state(const SystemParams& sys, const BeamDrive& beam,
                                   double target_full_detuning);

/// clamped_detuning_state at the beam's own detuning, for every beam.
std::vector<SteadyState> clamped_states(const SystemParams& sys);

}  // namespace optorot
