#include "support.hpp"

#include "optorot/langevin.hpp"
#include "optorot/presets.hpp"
#include "optorot/thermo.hpp"

#include <doctest.h>

using namespace optorot;
using optorot::test::rel_diff;

namespace {

// Low-Q bare oscillator so that ring-down and mixing take few periods.
SystemParams fast_bare(double temperature = 300.0) {
  auto sys = load_preset("desk-scale");
  auto m = sys.mirror();
  m.quality_factor = 50.0;
  auto beams = sys.beams();
  for (auto& b : beams) b.input_power = 0.0;
  return sys.with_mirror(m).with_beams(beams).with_env(EnvParams{temperature});
}

// Desk-scale preset with a stronger cooling beam: broad enough line for a
// short spectral estimate.
SystemParams broad_cooled() {
  auto sys = load_preset("desk-scale");
  auto beams = sys.beams();
  beams[1].input_power = 0.005;
  return sys.with_beams(beams);
}

double period(const SystemParams& sys) { return 2.0 * si::pi / sys.omega_phi(); }

SimConfig adiabatic_config(const SystemParams& sys, double periods, int trajectories) {
  SimConfig cfg;
  cfg.scheme = Scheme::adiabatic;
  cfg.dt = 0.005 * period(sys);
  cfg.duration = periods * period(sys);
  cfg.n_trajectories = trajectories;
  cfg.rng_seed = 2024;
  return cfg;
}

}  // namespace

TEST_CASE("configuration limits") {
  const auto sys = load_preset("desk-scale");
  SimConfig cfg;
  cfg.duration = 1.0;
  cfg.scheme = Scheme::full_cavity;
  cfg.dt = 0.2 / sys.linewidth();
  CHECK_THROWS_AS(validate(cfg, sys), std::invalid_argument);
  cfg.dt = 0.1 / sys.linewidth();
  CHECK_NOTHROW(validate(cfg, sys));
  cfg.scheme = Scheme::adiabatic;
  cfg.dt = 0.02 * 2.0 * si::pi / mechanical_rate(sys);
  CHECK_THROWS_AS(validate(cfg, sys), std::invalid_argument);
  cfg.dt = 0.01 * 2.0 * si::pi / mechanical_rate(sys);
  CHECK_NOTHROW(validate(cfg, sys));
  cfg.include_field_vacuum_noise = true;
  CHECK_THROWS_AS(validate(cfg, sys), std::invalid_argument);
  cfg.include_field_vacuum_noise = false;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(validate(cfg, sys), std::invalid_argument);

  // the optical spring of the worked example sets the adiabatic step
  const auto example = load_preset("worked-example");
  CHECK(mechanical_rate(example) > 100.0 * example.omega_phi());
  CHECK(recommended_scheme(example) == Scheme::adiabatic);
  CHECK(recommended_scheme(sys) == Scheme::full_cavity);
}

TEST_CASE("unstable configurations are refused") {
  auto sys = load_preset("desk-scale");
  sys = sys.with_beams({sys.beams()[0]});  // trap alone is anti-damped
  SimConfig cfg;
  cfg.scheme = Scheme::full_cavity;
  cfg.dt = 0.1 / sys.linewidth();
  cfg.duration = 10.0 * period(sys);
  CHECK_THROWS_AS(simulate(sys, cfg), std::domain_error);
}

TEST_CASE("noiseless ring-down follows the damped oscillator") {
  const auto sys = fast_bare();
  const double inertia = sys.inertia();
  const double stiffness = inertia * sys.omega_phi() * sys.omega_phi();
  const double gamma = sys.damping() / inertia;
  const double decay_time = 2.0 / gamma;  // amplitude e-folding
  auto cfg = adiabatic_config(sys, 0.0, 1);
  cfg.thermal_noise = false;
  cfg.initial_phi_offset = 1e-3;
  cfg.duration = 21.0 * decay_time;
  cfg.burn_in = 20.0 * decay_time;
  const auto ens = simulate(sys, cfg);
  const auto& s = ens.trajectories[0].samples;
  const double h = cfg.dt;
  auto leapfrog = [&](double step_size, double p, double& l) {
    p += 0.5 * step_size * l / inertia;
    const double half_loss = 0.5 * step_size * gamma;
    l = (l * (1.0 - half_loss) - step_size * stiffness * p) / (1.0 + half_loss);
    return p + 0.5 * step_size * l / inertia;
  };
  const auto stride = static_cast<std::int64_t>(std::llround(ens.sample_dt / h));

  // Exact recurrence of the integrator: half drift, kick with trapezoidal
  // damping, half drift.
  double phi = 1e-3, lz = 0.0;
  std::int64_t step = 0;
  const double wd = std::sqrt(sys.omega_phi() * sys.omega_phi() - 0.25 * gamma * gamma);
  double worst_discrete = 0.0, worst_continuous = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (; step < (i + 1) * stride; ++step) phi = leapfrog(h, phi, lz);
    const double t = ens.time(i);
    const double envelope = 1e-3 * std::exp(-0.5 * gamma * t);
    worst_discrete = std::max(worst_discrete, std::abs(s(i, 0) - phi) / envelope);
    if (t < 2.0 * decay_time) {
      const double exact = envelope * (std::cos(wd * t) + 0.5 * gamma / wd * std::sin(wd * t));
      worst_continuous = std::max(worst_continuous, std::abs(s(i, 0) - exact) / envelope);
    }
  }
  CHECK(worst_discrete < 1e-9);
  CHECK(worst_continuous < 0.02);

  // The scheme is second order: halving the step quarters the deviation.
  auto deviation = [&](double step_size) {
    double p = 1e-3, l = 0.0, worst = 0.0;
    const auto n = static_cast<std::int64_t>(std::llround(2.0 * decay_time / step_size));
    for (std::int64_t k = 1; k <= n; ++k) {
      p = leapfrog(step_size, p, l);
      const double t = static_cast<double>(k) * step_size;
      const double env = 1e-3 * std::exp(-0.5 * gamma * t);
      const double exact = env * (std::cos(wd * t) + 0.5 * gamma / wd * std::sin(wd * t));
      worst = std::max(worst, std::abs(p - exact) / env);
    }
    return worst;
  };
  const double ratio = deviation(h) / deviation(0.5 * h);
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
  CHECK(ens.max_abs_dphi < 1e-6 * 1e-3);
}

TEST_CASE("bare thermal variance matches the Ornstein-Uhlenbeck value") {
  const auto sys = fast_bare();
  const auto ens = simulate(sys, adiabatic_config(sys, 2000.0, 16));
  const double expected = si::boltzmann * sys.temperature() /
                          (sys.inertia() * sys.omega_phi() * sys.omega_phi());
  CAPTURE(ens.var_phi / expected);
  CHECK(std::abs(ens.var_phi - expected) < 3.0 * ens.var_phi_stderr);
  CHECK(ens.var_phi_stderr < 0.03 * expected);
  CHECK(std::abs(ens.T_eff_sim - sys.temperature()) < 3.0 * ens.T_eff_sim_stderr);

  SUBCASE("halving dt stays within the Monte-Carlo error") {
    auto cfg = adiabatic_config(sys, 2000.0, 16);
    cfg.dt *= 0.5;
    const auto half = simulate(sys, cfg);
    const double sigma = std::hypot(ens.var_phi_stderr, half.var_phi_stderr);
    CHECK(std::abs(half.var_phi - ens.var_phi) < 3.0 * sigma);
  }
}

TEST_CASE("seed determinism") {
  const auto sys = broad_cooled();
  SimConfig cfg;
  cfg.scheme = Scheme::full_cavity;
  cfg.dt = 0.1 / sys.linewidth();
  cfg.duration = 60.0 * period(sys);
  cfg.burn_in = 10.0 * period(sys);
  cfg.n_trajectories = 3;
  cfg.rng_seed = 77;
  cfg.record_fields = true;
  const auto a = simulate(sys, cfg);
  const auto b = simulate(sys, cfg);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i)
    CHECK((a.trajectories[i].samples.array() == b.trajectories[i].samples.array()).all());
  CHECK(a.var_phi == b.var_phi);
  CHECK(a.T_eff_sim == b.T_eff_sim);
  CHECK(a.trajectories[0].samples.cols() == 6);
  cfg.rng_seed = 78;
  const auto c = simulate(sys, cfg);
  CHECK(c.var_phi != a.var_phi);
  // trajectories draw from independent streams
  CHECK((a.trajectories[0].samples.col(0).array() != a.trajectories[1].samples.col(0).array()).any());
}

TEST_CASE("field relaxes to the steady state without noise") {
  const auto sys = broad_cooled();
  SimConfig cfg;
  cfg.scheme = Scheme::full_cavity;
  cfg.dt = 0.1 / sys.linewidth();
  cfg.duration = 20.0 * period(sys);
  cfg.burn_in = 10.0 * period(sys);
  cfg.thermal_noise = false;
  cfg.record_fields = true;
  const auto ens = simulate(sys, cfg);
  const auto states = clamped_states(sys);
  const auto& s = ens.trajectories[0].samples;
  CHECK(std::abs(s(s.rows() - 1, 0) - ens.phi_s) < 1e-12 * ens.phi_s);
  for (std::size_t j = 0; j < states.size(); ++j) {
    const double re = s(s.rows() - 1, 2 + 2 * static_cast<Eigen::Index>(j));
    const double im = s(s.rows() - 1, 3 + 2 * static_cast<Eigen::Index>(j));
    CHECK(rel_diff(re * re + im * im, states[j].intensity) < 1e-9);
  }
}

TEST_CASE("spectra") {
  SUBCASE("bare oscillator peaks at its resonance") {
    const auto sys = fast_bare();
    const auto ens = simulate(sys, adiabatic_config(sys, 2000.0, 4));
    const auto psd = psd_estimate(ens, 8192);
    const auto fit = fit_lorentzian(psd);
    REQUIRE(fit.ok);
    CHECK(std::abs(fit.peak_omega - sys.omega_phi()) <= psd.bin_width());
    CHECK(std::abs(fit.omega_0 / sys.omega_phi() - 1.0) < 0.02);
    CHECK(std::abs(fit.linewidth / (sys.damping() / sys.inertia()) - 1.0) < 0.1);
  }
  SUBCASE("cooled mode is shifted and broadened as predicted") {
    const auto sys = broad_cooled();
    const auto response = effective_params(sys);
    SimConfig cfg;
    cfg.scheme = Scheme::full_cavity;
    cfg.dt = 0.1 / sys.linewidth();
    cfg.duration = 1000.0 * period(sys);
    cfg.n_trajectories = 16;
    cfg.rng_seed = 5;
    const auto ens = simulate(sys, cfg);
    const auto psd = psd_estimate(ens, 4096);
    const auto fit = fit_lorentzian(psd);
    REQUIRE(fit.ok);
    CHECK(std::abs(fit.omega_0 / response.omega_eff() - 1.0) < 0.1);
    CHECK(std::abs(fit.linewidth / (response.D_eff / sys.inertia()) - 1.0) < 0.1);
    CHECK(ens.max_abs_dphi < 0.1);
    const auto t = effective_temperature(sys, response);
    CHECK(std::abs(ens.T_eff_sim - t.T_eff) < 3.0 * ens.T_eff_sim_stderr);
  }
  SUBCASE("white torque record is flat") {
    // In the decoupled limit the rotor only sees the white thermal torque.
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    std::vector<double> torque(1 << 17);
    for (auto& v : torque) v = normal(rng);
    const auto psd = welch_psd(torque, 1.0, 512);
    const Eigen::VectorXd inner = psd.density.segment(1, psd.density.size() - 2);
    CHECK(inner.maxCoeff() / inner.mean() < 1.5);
  }
  CHECK_THROWS_AS(psd_estimate(simulate(fast_bare(), adiabatic_config(fast_bare(), 100.0, 1)), 1 << 14),
                  std::runtime_error);
}
