#include "optorot/sweep.hpp"

#include "optorot/detail/parallel.hpp"
#include "optorot/linresp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace optorot {
namespace {

std::size_t find_beam(const SystemParams& sys, const std::string& key, const std::string& name) {
  const auto& beams = sys.beams();
  for (std::size_t i = 0; i < beams.size(); ++i)
    if (beams[i].label == key) return i;
  if (key.rfind("beam", 0) == 0 && key.size() > 4) {
    const std::string digits = key.substr(4);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const auto idx = std::stoul(digits);
      if (idx < beams.size()) return idx;
    }
  }
  throw ConfigError(name, "no beam named '" + key + "'");
}

double to_value(const FreeParameter& p, double u) {
  return p.log_scale ? p.lo * std::pow(p.hi / p.lo, u) : p.lo + u * (p.hi - p.lo);
}

}  // namespace

const char* to_string(Objective o) {
  switch (o) {
    case Objective::n_quanta: return "n_quanta";
    case Objective::T_eff: return "T_eff";
    case Objective::D_eff_ratio: return "D_eff_ratio";
    case Objective::omega_eff_ratio: return "omega_eff_ratio";
  }
  return "?";
}

Objective parse_objective(const std::string& name) {
  for (auto o : {Objective::n_quanta, Objective::T_eff, Objective::D_eff_ratio,
                 Objective::omega_eff_ratio})
    if (name == to_string(o)) return o;
  throw ConfigError("objective", "unknown objective '" + name + "'");
}

SystemParams apply_parameter(const SystemParams& sys, const std::string& name, double value) {
  if (name == "l") {
    auto cavity = sys.cavity();
    cavity.topological_charge = static_cast<int>(std::lround(value));
    return sys.with_cavity(cavity);
  }
  if (name == "L") {
    auto cavity = sys.cavity();
    cavity.length = value;
    return sys.with_cavity(cavity);
  }
  if (name == "T") return sys.with_env(EnvParams{value});
  if (name == "Q") {
    auto mirror = sys.mirror();
    mirror.quality_factor = value;
    mirror.damping_constant.reset();
    return sys.with_mirror(mirror);
  }
  const auto dot = name.rfind('.');
  if (dot == std::string::npos || dot == 0)
    throw ConfigError(name, "unknown sweep parameter");
  const std::string field = name.substr(dot + 1);
  // Both <label>.power and the config spelling beam.<label>.input_power.
  std::string key = name.substr(0, dot);
  if (key.rfind("beam.", 0) == 0) key = key.substr(5);
  auto beams = sys.beams();
  auto& beam = beams[find_beam(sys, key, name)];
  if (field == "power" || field == "input_power")
    beam.input_power = value;
  else if (field == "detuning")
    beam.detuning = value;
  else if (field == "detuning_linewidths")
    beam.detuning = value * sys.linewidth();
  else
    throw ConfigError(name, "unknown beam field '" + field + "'");
  return sys.with_beams(std::move(beams));
}

std::vector<double> Axis::values() const {
  if (points < 2) throw ConfigError(parameter, "an axis needs at least 2 points");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError(parameter, "axis bounds must be finite");
  if (log_scale && !(lo > 0.0 && hi > 0.0))
    throw ConfigError(parameter, "log axis bounds must be positive");
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / (points - 1);
    v[static_cast<std::size_t>(i)] = log_scale ? lo * std::pow(hi / lo, u) : lo + u * (hi - lo);
  }
  v.back() = hi;
  return v;
}

std::optional<double> PointEvaluation::objective(Objective o, const SystemParams& sys) const {
  switch (o) {
    case Objective::n_quanta:
      if (thermometry) return thermometry->n_quanta;
      return std::nullopt;
    case Objective::T_eff:
      if (thermometry) return thermometry->T_eff;
      return std::nullopt;
    case Objective::D_eff_ratio:
      return D_eff / sys.damping();
    case Objective::omega_eff_ratio:
      if (anti_trapped) return std::nullopt;
      return std::sqrt(omega_eff_sq) / sys.omega_phi();
  }
  return std::nullopt;
}

PointEvaluation evaluate_point(const SystemParams& sys) {
  PointEvaluation e;
  const auto response = effective_params(sys);
  e.omega_eff_sq = response.omega_eff_sq;
  e.D_eff = response.D_eff;
  e.anti_trapped = response.anti_trapped;
  e.anti_damped = response.anti_damped;
  e.verdict = routh_hurwitz_stable(drift_matrix(sys));
  if (e.verdict == Stability::stable && !e.anti_trapped && !e.anti_damped)
    e.thermometry = effective_temperature(sys, response);
  return e;
}

std::vector<SweepRow> run_sweep(const SystemParams& sys, const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2)
    throw ConfigError("axes", "a sweep takes one or two axes");
  std::vector<std::vector<double>> grids;
  for (const auto& a : spec.axes) grids.push_back(a.values());

  std::vector<SweepRow> rows;
  const std::size_t inner = grids.size() == 2 ? grids[1].size() : 1;
  for (double x : grids[0]) {
    for (std::size_t j = 0; j < inner; ++j) {
      SweepRow row;
      row.coords.push_back(x);
      if (grids.size() == 2) row.coords.push_back(grids[1][j]);
      rows.push_back(std::move(row));
    }
  }

  detail::parallel_for(rows.size(), [&](std::size_t i) {
    auto& row = rows[i];
    try {
      SystemParams point = sys;
      for (std::size_t k = 0; k < spec.axes.size(); ++k)
        point = apply_parameter(point, spec.axes[k].parameter, row.coords[k]);
      row.eval = evaluate_point(point);
      row.objective = row.eval.objective(spec.objective, point);
    } catch (const std::exception& e) {
      row.eval.error = e.what();
    }
  });
  return rows;
}

MinimizeResult minimize_n(const SystemParams& sys, const std::vector<FreeParameter>& free,
                          const MinimizeOptions& options) {
  if (free.empty()) throw ConfigError("free", "no free parameters");
  for (const auto& p : free) {
    if (!(p.hi > p.lo)) throw ConfigError(p.parameter, "upper bound must exceed lower bound");
    if (p.log_scale && !(p.lo > 0.0)) throw ConfigError(p.parameter, "log bounds must be positive");
  }
  const std::size_t k = free.size();
  MinimizeResult result;
  std::map<std::vector<double>, std::optional<double>> cache;

  auto evaluate = [&](const std::vector<double>& u, const char* stage) -> std::optional<double> {
    if (auto it = cache.find(u); it != cache.end()) return it->second;
    std::vector<double> coords(k);
    for (std::size_t i = 0; i < k; ++i) coords[i] = to_value(free[i], u[i]);
    std::optional<double> n;
    std::optional<PointEvaluation> eval;
    try {
      SystemParams point = sys;
      for (std::size_t i = 0; i < k; ++i) point = apply_parameter(point, free[i].parameter, coords[i]);
      eval = evaluate_point(point);
      if (eval->thermometry) n = eval->thermometry->n_quanta;
    } catch (const std::exception&) {
    }
    cache.emplace(u, n);
    result.trail.push_back({coords, n, stage});
    if (n && (!result.best_n || *n < *result.best_n)) {
      result.best_n = n;
      result.best_coords = coords;
      result.best_eval = eval;
    }
    return n;
  };

  // Coarse grid, first parameter slowest.
  const int m = std::max(2, options.coarse_points);
  std::vector<int> idx(k, 0);
  std::optional<std::vector<double>> start;
  std::optional<double> start_n;
  for (bool done = false; !done;) {
    std::vector<double> u(k);
    for (std::size_t i = 0; i < k; ++i) u[i] = static_cast<double>(idx[i]) / (m - 1);
    auto n = evaluate(u, "coarse");
    if (n && (!start_n || *n < *start_n)) {
      start_n = n;
      start = u;
    }
    done = true;
    for (std::size_t i = k; i-- > 0;) {
      if (++idx[i] < m) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }
  if (!start) return result;

  std::vector<double> u = *start;
  double best = *start_n;
  double step = 1.0 / (m - 1);
  while (step >= options.min_step &&
         static_cast<int>(result.trail.size()) < options.max_evaluations) {
    std::optional<std::vector<double>> move;
    double move_n = best;
    for (std::size_t i = 0; i < k; ++i) {
      for (double sign : {-1.0, 1.0}) {
        auto trial = u;
        trial[i] = std::clamp(trial[i] + sign * step, 0.0, 1.0);
        if (trial[i] == u[i]) continue;
        auto n = evaluate(trial, "pattern");
        if (n && *n < move_n) {
          move_n = *n;
          move = trial;
        }
      }
    }
    if (move) {
      u = *move;
      best = move_n;
    } else {
      step *= 0.5;
    }
  }
  return result;
}

}  // namespace optorot
