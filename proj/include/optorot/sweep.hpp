#pragma once

#include "optorot/params.hpp"
#include "optorot/stability.hpp"
#include "optorot/thermo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace optorot {

enum class Objective { n_quanta, T_eff, D_eff_ratio, omega_eff_ratio };

const char* to_string(Objective o);
Objective parse_objective(const std::string& name);

/// Returns a copy of `sys` with one named parameter replaced. Names:
///   l, T, Q, L                     topological charge, temperature, Q, length
///   <beam>.power                   input power in W
///   <beam>.detuning                full detuning in rad/s
///   <beam>.detuning_linewidths     full detuning in units of the linewidth
/// where <beam> is a beam label or `beam<index>`. The config spelling
/// beam.<label>.input_power is accepted as well. Throws ConfigError.
SystemParams apply_parameter(const SystemParams& sys, const std::string& name, double value);

struct Axis {
  std::string parameter;
  double lo = 0.0;
  double hi = 0.0;
  int points = 2;
  bool log_scale = false;

  std::vector<double> values() const;
};

struct SweepSpec {
  std::vector<Axis> axes;  // one or two
  Objective objective = Objective::n_quanta;
};

struct PointEvaluation {
  double omega_eff_sq = 0.0;
  double D_eff = 0.0;
  Stability verdict = Stability::unstable;
  bool anti_trapped = false;
  bool anti_damped = false;
  std::optional<Thermometry> thermometry;  // only for stable, trapped, damped points
  std::string error;                       // parameter application failures

  /// Objective value when defined (thermometry required for n and T_eff).
  std::optional<double> objective(Objective o, const SystemParams& sys) const;
};

PointEvaluation evaluate_point(const SystemParams& sys);

struct SweepRow {
  std::vector<double> coords;
  PointEvaluation eval;
  std::optional<double> objective;
};

/// Evaluates every grid point (first axis slowest). Row order is grid order.
std::vector<SweepRow> run_sweep(const SystemParams& sys, const SweepSpec& spec);

struct FreeParameter {
  std::string parameter;
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
};

struct MinimizeOptions {
  int coarse_points = 11;        // per parameter
  double min_step = 1e-7;        // in unit-box coordinates
  int max_evaluations = 20000;
};

struct AuditEntry {
  std::vector<double> coords;
  std::optional<double> n_quanta;  // empty when infeasible
  std::string stage;               // "coarse" or "pattern"
};

struct MinimizeResult {
  std::optional<std::vector<double>> best_coords;
  std::optional<double> best_n;
  std::optional<PointEvaluation> best_eval;
  std::vector<AuditEntry> trail;
};

/// Coarse grid scan followed by compass pattern search, feasible only at
/// Routh-Hurwitz-stable points. Empty result when no stable point is found.
MinimizeResult minimize_n(const SystemParams& sys, const std::vector<FreeParameter>& free,
                          const MinimizeOptions& options = {});

}  // namespace optorot
