#include "support.hpp"

#include "optorot/steady.hpp"

#include <doctest.h>

#include <algorithm>

using namespace optorot;
using optorot::test::beam;
using optorot::test::example_system;
using optorot::test::rel_diff;

namespace {

// Stationary condition in photon number n, written directly from the two
// steady-state relations: n (g^2 + (delta - pull n)^2) - gamma |a_in|^2.
struct PhotonBalance {
  long double g, delta, pull, drive;  // drive = gamma |a_in|^2
  long double operator()(long double n) const {
    const long double det = delta - pull * n;
    return n * (g * g + det * det) - drive;
  }
};

PhotonBalance balance_for(const SystemParams& sys, const BeamDrive& b) {
  const double xi = sys.coupling();
  const double pull = si::hbar * xi * xi / (sys.inertia() * sys.omega_phi() * sys.omega_phi());
  const double flux = b.input_power / (si::hbar * sys.omega_c());
  return {0.5L * sys.linewidth(), b.detuning, pull, static_cast<long double>(sys.linewidth()) * flux};
}

// Brackets every sign change of the balance on a dense grid over
// [0, n_max], n_max = drive / g^2, and bisects each bracket.
std::vector<double> grid_roots(const PhotonBalance& f, int points) {
  const long double n_max = f.drive / (f.g * f.g) * 1.000001L;
  std::vector<double> roots;
  long double prev_n = 0.0L, prev_f = f(0.0L);
  for (int i = 1; i <= points; ++i) {
    const long double n = n_max * i / points;
    const long double v = f(n);
    if ((prev_f < 0) != (v < 0)) {
      long double lo = prev_n, hi = n;
      for (int k = 0; k < 200; ++k) {
        const long double mid = 0.5L * (lo + hi);
        if ((f(mid) < 0) == (prev_f < 0))
          lo = mid;
        else
          hi = mid;
      }
      roots.push_back(static_cast<double>(0.5L * (lo + hi)));
    }
    prev_n = n;
    prev_f = v;
  }
  return roots;
}

// Discriminant of the cubic pull^2 n^3 - 2 delta pull n^2 + (g^2 + delta^2) n - drive.
long double discriminant(const PhotonBalance& f) {
  const long double a = f.pull * f.pull, b = -2.0L * f.delta * f.pull,
                    c = f.g * f.g + f.delta * f.delta, d = -f.drive;
  return 18 * a * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * a * c * c * c -
         27 * a * a * d * d;
}

// Power at which the discriminant changes sign, by bisection on [lo, hi].
double discriminant_threshold(const SystemParams& sys, double delta, double lo, double hi) {
  auto sign_at = [&](double p) { return discriminant(balance_for(sys, beam(p, delta))) > 0; };
  const bool s_lo = sign_at(lo);
  REQUIRE(s_lo != sign_at(hi));
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (sign_at(mid) == s_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("no drive gives a single empty branch") {
  const auto sys = example_system({beam(0.0, 0.3e8)});
  const auto states = steady_states(sys, sys.beams()[0]);
  REQUIRE(states.size() == 1);
  CHECK(states[0].a_s == 0.0);
  CHECK(states[0].phi_s == 0.0);
  CHECK(states[0].Lz_s == 0.0);
  const auto report = is_bistable(sys, sys.beams()[0]);
  CHECK_FALSE(report.bistable);
  CHECK(report.branch_count == 1);
}

TEST_CASE("uncoupled resonant cavity") {
  const auto sys = example_system({beam(0.01, 0.0)}, 0);
  const auto states = steady_states(sys, sys.beams()[0]);
  REQUIRE(states.size() == 1);
  const double a_in = std::sqrt(input_photon_flux(sys, sys.beams()[0]));
  CHECK(rel_diff(states[0].a_s, 2.0 * a_in / std::sqrt(sys.linewidth())) < 1e-14);
  CHECK(states[0].phi_s == 0.0);
  for (double p : {1e-6, 1e-3, 1.0, 1e3}) {
    const auto s = example_system({beam(p, 3.0 * sys.linewidth())}, 0);
    CHECK_FALSE(is_bistable(s, s.beams()[0]).bistable);
  }
}

TEST_CASE("cooling beam branches match a dense sign-change scan") {
  const auto sys = example_system({beam(0.004, 0.5 * 2.0 * si::pi * 1e7)});
  const auto& b = sys.beams()[0];
  const auto states = steady_states(sys, b);
  const auto oracle = grid_roots(balance_for(sys, b), 200000);
  REQUIRE(states.size() == oracle.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    CHECK(rel_diff(states[i].intensity, oracle[i]) < 1e-9);
    CHECK(states[i].residual_amplitude < 1e-10);
    CHECK(states[i].residual_angle < 1e-10);
  }
}

TEST_CASE("three branches inside the bistable window") {
  const auto base = example_system({beam(0.0, 4.0 * 2.0 * si::pi * 1e7)});
  const auto window = bistability_window(base, base.beams()[0]);
  REQUIRE(window.has_value());
  CHECK(window->lower < window->upper);
  const double p = std::sqrt(window->lower * window->upper);
  const auto sys = example_system({beam(p, base.beams()[0].detuning)});
  const auto states = steady_states(sys, sys.beams()[0]);
  const auto oracle = grid_roots(balance_for(sys, sys.beams()[0]), 400000);
  REQUIRE(oracle.size() == 3);
  REQUIRE(states.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rel_diff(states[i].intensity, oracle[i]) < 1e-9);
    CHECK(states[i].branch_index == static_cast<int>(i));
  }
  CHECK(is_bistable(sys, sys.beams()[0]).bistable);

  SUBCASE("window edges are the discriminant zeros") {
    const double delta = base.beams()[0].detuning;
    const double lower = discriminant_threshold(base, delta, 0.5 * window->lower, p);
    const double upper = discriminant_threshold(base, delta, p, 2.0 * window->upper);
    CHECK(rel_diff(window->lower, lower) < 1e-6);
    CHECK(rel_diff(window->upper, upper) < 1e-6);
  }
}

TEST_CASE("no bistability below the critical detuning or for negative detuning") {
  for (double d : {-6.0, -2.0, 0.0, 1.0, 1.7}) {
    const auto sys = example_system({beam(0.0, d * 0.5 * 2.0 * si::pi * 1e7)});
    CHECK_FALSE(bistability_window(sys, sys.beams()[0]).has_value());
    for (double p : {1e-4, 1e-2, 1.0, 100.0}) {
      const auto s = example_system({beam(p, sys.beams()[0].detuning)});
      CHECK(steady_states(s, s.beams()[0]).size() == 1);
    }
  }
}

TEST_CASE("random configurations: counts, residuals, sign of the angle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  int bistable_seen = 0;
  for (int i = 0; i < 500; ++i) {
    auto sys = optorot::test::random_single_beam(rng);
    auto b = sys.beams()[0];
    b.detuning = u(rng) * sys.linewidth();
    // Scale the power so the scaled drive covers the bistable range.
    const double g = 0.5 * sys.linewidth();
    const double p_scaled = optorot::test::log_uniform(rng, 1e-3, 1e3);
    b.input_power = p_scaled * g * g * g / (sys.linewidth() * detuning_pull(sys)) * si::hbar *
                    sys.omega_c();
    sys = sys.with_beams({b});
    const auto states = steady_states(sys, b);
    const auto report = is_bistable(sys, b);
    CHECK((states.size() == 1 || states.size() == 3 || report.marginal));
    if (states.size() == 3) ++bistable_seen;
    for (std::size_t k = 0; k < states.size(); ++k) {
      CHECK(states[k].residual_amplitude < 1e-10);
      CHECK(states[k].residual_angle < 1e-10);
      CHECK(states[k].phi_s >= 0.0);
      CHECK(states[k].a_s >= 0.0);
      if (k > 0) CHECK(states[k].intensity > states[k - 1].intensity);
    }
  }
  CHECK(bistable_seen > 10);
}

TEST_CASE("clamped detuning") {
  const double gamma = 2.0 * si::pi * 1e7;
  SUBCASE("resonance maximum") {
    const auto sys = example_system({beam(0.004, 0.0)});
    const auto s = clamped_detuning_state(sys, sys.beams()[0], 0.0);
    const double flux = 0.004 / (si::hbar * sys.omega_c());
    CHECK(rel_diff(s.intensity, 4.0 * flux / gamma) < 1e-14);
    CHECK(s.full_detuning == 0.0);
  }
  SUBCASE("worked-example cooling beam, independent arithmetic") {
    const auto sys = example_system({beam(0.004, 0.5 * gamma)});
    const auto s = clamped_detuning_state(sys, sys.beams()[0], 0.5 * gamma);
    // n = gamma P / (hbar omega_c) / (gamma^2 / 4 + gamma^2 / 4) = 2 P / (hbar omega_c gamma)
    const double omega_c = 2.0 * si::pi * si::speed_of_light / 1.064e-6;
    const double n = 2.0 * 0.004 / (si::hbar * omega_c * gamma);
    CHECK(rel_diff(s.intensity, n) < 1e-14);
    CHECK(rel_diff(s.intensity, 6.82e8) < 2e-3);
    CHECK(rel_diff(s.phi_s, si::hbar * 2.99792458e13 * n / (5e-19 * std::pow(2 * si::pi * 2500, 2))) <
          1e-13);
    CHECK(s.residual_amplitude < 1e-10);
    CHECK(s.residual_angle < 1e-10);
  }
  SUBCASE("far detuned limit") {
    const auto sys = example_system({beam(0.004, 0.0)});
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 1.0; d < 1e12; d *= 10.0) {
      const auto s = clamped_detuning_state(sys, sys.beams()[0], d * gamma);
      CHECK(s.a_s < prev);
      prev = s.a_s;
    }
    CHECK(prev < 1e-6);
  }
  SUBCASE("monotone in power") {
    double prev = -1.0;
    for (double p = 1e-9; p < 10.0; p *= 1.7) {
      const auto sys = example_system({beam(p, -2.5 * gamma)});
      const auto s = clamped_states(sys).front();
      CHECK(s.intensity > prev);
      prev = s.intensity;
    }
  }
}
