#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>

namespace optorot {

/// One-sided power spectral density in units of x^2 per (rad/s), normalised
/// so that the sum of density * bin width equals the variance.
struct Spectrum {
  Eigen::VectorXd omega;
  Eigen::VectorXd density;
  std::size_t segments = 0;

  double bin_width() const { return omega.size() > 1 ? omega(1) - omega(0) : 0.0; }
};

/// Averaged periodogram (Hann window, 50% overlap, per-segment mean removed)
/// accumulated over any number of independent series.
class WelchEstimator {
 public:
  WelchEstimator(double sample_dt, std::size_t segment_length);

  void add(std::span<const double> series);
  std::size_t segments() const { return segments_; }
  /// Throws std::runtime_error when no segment has been accumulated.
  Spectrum result() const;

 private:
  double sample_dt_;
  std::size_t segment_length_;
  Eigen::VectorXd window_;
  double window_power_ = 0.0;
  Eigen::VectorXd accumulated_;
  std::size_t segments_ = 0;
};

Spectrum welch_psd(std::span<const double> series, double sample_dt, std::size_t segment_length);

/// Damped-oscillator line shape A / ((w0^2 - w^2)^2 + G^2 w^2) fitted to the
/// bins above `threshold` times the peak, by weighted linear least squares
/// on 1/S as a quadratic in w^2.
struct LorentzianFit {
  double omega_0 = 0.0;
  double linewidth = 0.0;  // G, full width at half maximum in rad/s
  double amplitude = 0.0;
  double peak_omega = 0.0;  // location of the largest bin
  bool ok = false;
};

LorentzianFit fit_lorentzian(const Spectrum& spectrum, double threshold = 0.1);

}  // namespace optorot
