#include "optorot/steady.hpp"

#include "optorot/constants.hpp"

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>

namespace optorot {
namespace {

double relative_residual(double value, double expected) {
  const double scale = std::max(std::abs(value), std::abs(expected));
  return scale > 0.0 ? std::abs(value - expected) / scale : 0.0;
}

// Fills phi_s, residuals and derived fields for a state with known photon
// number, measured against the bare detuning `delta`.
SteadyState make_state(const SystemParams& sys, double flux, double delta, double photons) {
  const double g = 0.5 * sys.linewidth();
  const double xi = sys.coupling();
  const double stiffness = sys.inertia() * sys.omega_phi() * sys.omega_phi();

  SteadyState s;
  s.intensity = photons;
  s.a_s = std::sqrt(photons);
  s.phi_s = si::hbar * xi * photons / stiffness;
  s.full_detuning = delta - xi * s.phi_s;
  const double a_expected =
      std::sqrt(sys.linewidth() * flux) / std::hypot(g, delta - xi * s.phi_s);
  s.residual_amplitude = relative_residual(s.a_s, a_expected);
  s.residual_angle = relative_residual(s.phi_s, si::hbar * xi * s.a_s * s.a_s / stiffness);
  return s;
}

// x^3 - 2 d x^2 + (1 + d^2) x - p, the stationary condition in units where
// x = pull * n / g and d = delta / g.
struct ScaledCubic {
  double d;
  double p;
  double operator()(double x) const { return ((x - 2.0 * d) * x + 1.0 + d * d) * x - p; }
  double derivative(double x) const { return (3.0 * x - 4.0 * d) * x + 1.0 + d * d; }
};

struct RealRoots {
  std::vector<double> roots;
  bool merged = false;
};

RealRoots scaled_roots(const ScaledCubic& f) {
  RealRoots out;
  if (f.p == 0.0) {
    out.roots.push_back(0.0);
    return out;
  }
  Eigen::Vector4d coeffs(-f.p, 1.0 + f.d * f.d, -2.0 * f.d, 1.0);
  Eigen::PolynomialSolver<double, 3> solver(coeffs);
  const double scale = std::max({1.0, std::abs(f.d), std::cbrt(f.p)});

  std::vector<double> candidates;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
    const auto& z = solver.roots()[i];
    if (std::abs(z.imag()) > 1e-9 * std::max(scale, std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 4; ++it) {
      const double df = f.derivative(x);
      if (df == 0.0) break;
      const double step = f(x) / df;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    if (x > 0.0) candidates.push_back(x);
  }
  std::sort(candidates.begin(), candidates.end());
  for (double x : candidates) {
    if (!out.roots.empty() && std::abs(x - out.roots.back()) <= 1e-7 * scale) {
      out.merged = true;
      continue;
    }
    out.roots.push_back(x);
  }
  return out;
}

struct Scaling {
  double g;
  double pull;
  double flux;
};

Scaling scaling_for(const SystemParams& sys, const BeamDrive& beam) {
  return {0.5 * sys.linewidth(), detuning_pull(sys), input_photon_flux(sys, beam)};
}

}  // namespace

double input_photon_flux(const SystemParams& sys, const BeamDrive& beam) {
  return beam.input_power / (si::hbar * sys.omega_c());
}

double detuning_pull(const SystemParams& sys) {
  const double xi = sys.coupling();
  return si::hbar * xi * xi / (sys.inertia() * sys.omega_phi() * sys.omega_phi());
}

std::vector<SteadyState> steady_states(const SystemParams& sys, const BeamDrive& beam) {
  const auto [g, pull, flux] = scaling_for(sys, beam);
  const double delta = beam.detuning;
  std::vector<SteadyState> out;

  if (pull == 0.0 || flux == 0.0) {
    out.push_back(make_state(sys, flux, delta, sys.linewidth() * flux / (g * g + delta * delta)));
    return out;
  }

  const ScaledCubic cubic{delta / g, sys.linewidth() * flux * pull / (g * g * g)};
  const auto roots = scaled_roots(cubic);
  for (double x : roots.roots) {
    auto s = make_state(sys, flux, delta, x * g / pull);
    s.branch_index = static_cast<int>(out.size());
    out.push_back(s);
  }
  return out;
}

BistabilityReport is_bistable(const SystemParams& sys, const BeamDrive& beam) {
  const auto [g, pull, flux] = scaling_for(sys, beam);
  BistabilityReport report;
  if (pull == 0.0 || flux == 0.0) return report;
  const ScaledCubic cubic{beam.detuning / g, sys.linewidth() * flux * pull / (g * g * g)};
  const auto roots = scaled_roots(cubic);
  report.branch_count = static_cast<int>(roots.roots.size());
  report.marginal = roots.merged;
  report.bistable = report.branch_count == 3;
  return report;
}

std::optional<PowerWindow> bistability_window(const SystemParams& sys, const BeamDrive& beam) {
  const double g = 0.5 * sys.linewidth();
  const double pull = detuning_pull(sys);
  const double d = beam.detuning / g;
  if (pull == 0.0 || d * d <= 3.0 || d <= 0.0) return std::nullopt;

  // Turning points of p(x) = x (1 + (d - x)^2).
  const double root = std::sqrt(d * d - 3.0);
  const double x_lo = (2.0 * d - root) / 3.0;
  const double x_hi = (2.0 * d + root) / 3.0;
  auto p_of = [d](double x) { return x * (1.0 + (d - x) * (d - x)); };
  auto power_of = [&](double p) {
    return p * g * g * g / (sys.linewidth() * pull) * si::hbar * sys.omega_c();
  };
  return PowerWindow{power_of(p_of(x_hi)), power_of(p_of(x_lo))};
}

SteadyState clamped_detuning_state(const SystemParams& sys, const BeamDrive& beam,
                                   double target_full_detuning) {
  const double g = 0.5 * sys.linewidth();
  const double flux = input_photon_flux(sys, beam);
  const double photons =
      sys.linewidth() * flux / (g * g + target_full_detuning * target_full_detuning);
  const double phi_s = si::hbar * sys.coupling() * photons /
                       (sys.inertia() * sys.omega_phi() * sys.omega_phi());
  // The feedback sets the bare detuning to whatever keeps Delta on target.
  auto s = make_state(sys, flux, target_full_detuning + sys.coupling() * phi_s, photons);
  s.full_detuning = target_full_detuning;
  return s;
}

std::vector<SteadyState> clamped_states(const SystemParams& sys) {
  std::vector<SteadyState> out;
  out.reserve(sys.beams().size());
  for (const auto& beam : sys.beams())
    out.push_back(clamped_detuning_state(sys, beam, beam.detuning));
  return out;
}

}  // namespace optorot
