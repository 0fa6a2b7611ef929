#pragma once

#include "optorot/constants.hpp"
#include "optorot/params.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace optorot::test {

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Worked-example mirror and cavity, with the beams supplied by the caller.
inline SystemParams example_system(std::vector<BeamDrive> beams, int l = 100, double temperature = 300.0) {
  MirrorParams m;
  m.mass = 1e-8;
  m.radius = 1e-5;
  m.omega_phi = 2.0 * si::pi * 2500.0;
  m.quality_factor = 1e5;
  CavityParams c;
  c.length = 1e-3;
  c.linewidth = 2.0 * si::pi * 1e7;
  c.topological_charge = l;
  c.optical_angular_frequency = 2.0 * si::pi * si::speed_of_light / 1.064e-6;
  return SystemParams::make(m, c, std::move(beams), EnvParams{temperature});
}

inline BeamDrive beam(double power, double detuning, std::string label = "b") {
  return BeamDrive{power, detuning, std::move(label)};
}

// Log-uniform draw in [lo, hi].
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// A random single-beam system with moderate dimensionless ratios. The beam
// detuning is drawn in linewidth units from [-3, 3].
inline SystemParams random_single_beam(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  MirrorParams m;
  m.mass = log_uniform(rng, 1e-10, 1e-6);
  m.radius = log_uniform(rng, 1e-6, 1e-4);
  m.omega_phi = log_uniform(rng, 1e3, 1e5);
  m.quality_factor = log_uniform(rng, 1e2, 1e6);
  CavityParams c;
  c.length = log_uniform(rng, 1e-3, 1e-1);
  c.linewidth = m.omega_phi * log_uniform(rng, 10.0, 1e4);
  c.topological_charge = static_cast<int>(std::lround(log_uniform(rng, 1.0, 200.0)));
  c.optical_angular_frequency = 2.0 * si::pi * si::speed_of_light / 1.064e-6;
  const double power = log_uniform(rng, 1e-6, 1e-1);
  return SystemParams::make(m, c, {beam(power, u(rng) * c.linewidth)}, EnvParams{300.0});
}

}  // namespace optorot::test
