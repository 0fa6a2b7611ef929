#pragma once

#include <boost/property_tree/ptree.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace optorot {

/// One offending field in a rejected configuration.
struct FieldIssue {
  std::string field;
  std::string message;
};

/// Thrown when a configuration document or a parameter set violates the
/// physical invariants. Carries every offending field, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<FieldIssue> issues);
  ConfigError(std::string field, std::string message);
  const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<FieldIssue> issues_;
};

/// Torsional mirror modelled as a thin disk rotating about the cavity axis.
/// Exactly one of quality_factor / damping_constant is set.
struct MirrorParams {
  double mass = 0.0;       // kg
  double radius = 0.0;     // m
  double omega_phi = 0.0;  // rad/s
  std::optional<double> quality_factor;
  std::optional<double> damping_constant;  // kg m^2 / s

  double moment_of_inertia() const { return 0.5 * mass * radius * radius; }
};

struct CavityParams {
  double length = 0.0;                     // m
  double linewidth = 0.0;                  // rad/s, full energy decay rate
  int topological_charge = 0;              // l
  double optical_angular_frequency = 0.0;  // rad/s
};

/// A single laser drive. `detuning` is the cavity-minus-laser detuning in
/// rad/s; positive values put the laser below the cavity resonance.
struct BeamDrive {
  double input_power = 0.0;  // W
  double detuning = 0.0;     // rad/s
  std::string label;
};

struct EnvParams {
  double temperature = 0.0;  // K
};

/// D = I omega_phi / Q.
double derived_damping(const MirrorParams& mirror);

/// Validated, immutable parameter set with cached derived constants.
class SystemParams {
 public:
  /// Validates every component and throws ConfigError listing all issues.
  static SystemParams make(MirrorParams mirror, CavityParams cavity,
                           std::vector<BeamDrive> beams, EnvParams env);

  const MirrorParams& mirror() const { return mirror_; }
  const CavityParams& cavity() const { return cavity_; }
  const std::vector<BeamDrive>& beams() const { return beams_; }
  const EnvParams& env() const { return env_; }

  double inertia() const { return inertia_; }
  /// Optorotational coupling c l / L, in 1/s.
  double coupling() const { return coupling_; }
  double damping() const { return damping_; }
  double omega_phi() const { return mirror_.omega_phi; }
  double linewidth() const { return cavity_.linewidth; }
  double omega_c() const { return cavity_.optical_angular_frequency; }
  double temperature() const { return env_.temperature; }

  /// k_B T / (hbar omega_phi) > 10.
  bool high_temperature() const;

  SystemParams with_beams(std::vector<BeamDrive> beams) const;
  SystemParams with_mirror(MirrorParams mirror) const;
  SystemParams with_cavity(CavityParams cavity) const;
  SystemParams with_env(EnvParams env) const;

 private:
  SystemParams() = default;

  MirrorParams mirror_;
  CavityParams cavity_;
  std::vector<BeamDrive> beams_;
  EnvParams env_;
  double inertia_ = 0.0;
  double coupling_ = 0.0;
  double damping_ = 0.0;
};

using ConfigTree = boost::property_tree::ptree;

/// Parses the INI-style configuration text into a tree. Syntax errors are
/// reported as ConfigError with the offending line.
ConfigTree parse_config(std::istream& in);
ConfigTree parse_config_text(const std::string& text);

/// Builds a SystemParams from a parsed configuration document.
SystemParams build_system(const ConfigTree& raw_config);

/// Canonical configuration text for `sys`; parses back to the same values.
std::string to_config_text(const SystemParams& sys);

}  // namespace optorot
