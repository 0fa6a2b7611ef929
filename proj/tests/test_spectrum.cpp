#include "optorot/constants.hpp"
#include "optorot/spectrum.hpp"

#include <doctest.h>

#include <random>

using namespace optorot;

TEST_CASE("white noise gives a flat spectrum carrying the variance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 2.0);
  const double dt = 1e-3;
  std::vector<double> x(1 << 18);
  for (auto& v : x) v = normal(rng);
  const auto s = welch_psd(x, dt, 1024);
  CHECK(s.segments == 2 * (x.size() / 1024) - 1);
  const double expected = 4.0 * dt / si::pi;
  const Eigen::VectorXd inner = s.density.segment(1, s.density.size() - 2);
  CHECK(std::abs(inner.mean() / expected - 1.0) < 0.02);
  // a flat spectrum: no bin far from the mean given ~1000 segments of averaging
  CHECK(inner.maxCoeff() / expected < 1.3);
  CHECK(inner.minCoeff() / expected > 0.7);
  CHECK(std::abs(s.density.sum() * s.bin_width() / 4.0 - 1.0) < 0.02);
}

TEST_CASE("sinusoid appears at its frequency") {
  const double dt = 1e-3;
  const double w = 2.0 * si::pi * 60.0;
  std::vector<double> x(1 << 16);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(w * dt * static_cast<double>(i));
  const auto s = welch_psd(x, dt, 4096);
  Eigen::Index peak;
  s.density.maxCoeff(&peak);
  CHECK(std::abs(s.omega(peak) - w) <= s.bin_width());
  CHECK(std::abs(s.density.sum() * s.bin_width() / 0.5 - 1.0) < 0.01);
}

TEST_CASE("Lorentzian fit recovers an exact line shape") {
  Spectrum s;
  const int n = 2000;
  s.omega = Eigen::VectorXd::LinSpaced(n, 0.0, 4000.0);
  s.density.resize(n);
  const double w0 = 1234.0, width = 37.0, amp = 5e9;
  for (int i = 0; i < n; ++i) {
    const double w = s.omega(i);
    s.density(i) = amp / ((w0 * w0 - w * w) * (w0 * w0 - w * w) + width * width * w * w);
  }
  const auto fit = fit_lorentzian(s);
  REQUIRE(fit.ok);
  CHECK(std::abs(fit.omega_0 / w0 - 1.0) < 1e-6);
  CHECK(std::abs(fit.linewidth / width - 1.0) < 1e-4);
  CHECK(std::abs(fit.peak_omega - w0) <= s.bin_width());
}

TEST_CASE("estimator argument checks") {
  CHECK_THROWS_AS(WelchEstimator(1.0, 6), std::invalid_argument);
  CHECK_THROWS_AS(WelchEstimator(1.0, 9), std::invalid_argument);
  CHECK_THROWS_AS(WelchEstimator(0.0, 16), std::invalid_argument);
  WelchEstimator e(1.0, 16);
  std::vector<double> short_series(8, 1.0);
  e.add(short_series);
  CHECK(e.segments() == 0);
  CHECK_THROWS_AS(e.result(), std::runtime_error);
}
