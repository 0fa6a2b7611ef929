#include "optorot/spectrum.hpp"

#include "optorot/constants.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace optorot {

WelchEstimator::WelchEstimator(double sample_dt, std::size_t segment_length)
    : sample_dt_(sample_dt), segment_length_(segment_length) {
  if (segment_length < 8 || segment_length % 2 != 0)
    throw std::invalid_argument("WelchEstimator: segment length must be even and >= 8");
  if (!(sample_dt > 0.0)) throw std::invalid_argument("WelchEstimator: sample_dt must be > 0");
  const auto n = static_cast<Eigen::Index>(segment_length);
  window_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    window_(i) = 0.5 - 0.5 * std::cos(2.0 * si::pi * static_cast<double>(i) / static_cast<double>(n));
  window_power_ = window_.squaredNorm();
  accumulated_ = Eigen::VectorXd::Zero(n / 2 + 1);
}

void WelchEstimator::add(std::span<const double> series) {
  const std::size_t n = segment_length_;
  const std::size_t hop = n / 2;
  Eigen::FFT<double> fft;
  std::vector<double> segment(n);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t start = 0; start + n <= series.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += series[start + i];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      segment[i] = (series[start + i] - mean) * window_(static_cast<Eigen::Index>(i));
    fft.fwd(spectrum, segment);
    for (std::size_t k = 0; k <= n / 2; ++k)
      accumulated_(static_cast<Eigen::Index>(k)) += std::norm(spectrum[k]);
    ++segments_;
  }
}

Spectrum WelchEstimator::result() const {
  if (segments_ == 0) throw std::runtime_error("welch: series shorter than one segment");
  const auto n = static_cast<Eigen::Index>(segment_length_);
  const double d_omega = 2.0 * si::pi / (static_cast<double>(n) * sample_dt_);
  Spectrum s;
  s.segments = segments_;
  s.omega = Eigen::VectorXd::LinSpaced(n / 2 + 1, 0.0, d_omega * static_cast<double>(n / 2));
  // Two-sided density per Hz is dt |X|^2 / sum(w^2); fold and convert to rad/s.
  s.density = accumulated_ * (sample_dt_ / (window_power_ * static_cast<double>(segments_)) /
                              (2.0 * si::pi));
  s.density.segment(1, n / 2 - 1) *= 2.0;
  return s;
}

Spectrum welch_psd(std::span<const double> series, double sample_dt, std::size_t segment_length) {
  WelchEstimator est(sample_dt, segment_length);
  est.add(series);
  return est.result();
}

LorentzianFit fit_lorentzian(const Spectrum& spectrum, double threshold) {
  LorentzianFit fit;
  const auto& s = spectrum.density;
  if (s.size() < 4) return fit;
  Eigen::Index peak = 1;
  s.tail(s.size() - 1).maxCoeff(&peak);
  peak += 1;  // skip the DC bin
  fit.peak_omega = spectrum.omega(peak);
  const double cut = threshold * s(peak);
  Eigen::Index lo = peak;
  Eigen::Index hi = peak;
  while (lo > 1 && s(lo - 1) >= cut) --lo;
  while (hi + 1 < s.size() && s(hi + 1) >= cut) ++hi;
  const Eigen::Index m = hi - lo + 1;
  if (m < 3) return fit;

  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = spectrum.omega(lo + i) * spectrum.omega(lo + i);
    const double weight = s(lo + i);  // relative residuals in S
    a(i, 0) = weight;
    a(i, 1) = weight * u;
    a(i, 2) = weight * u * u;
    b(i) = 1.0;  // weight * (1 / S)
  }
  // Columns span wildly different magnitudes; normalise before solving.
  const Eigen::Vector3d col_scale = a.colwise().norm().transpose();
  const Eigen::Vector3d c =
      (a * col_scale.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b).cwiseQuotient(col_scale);
  if (!(c(2) > 0.0) || !(c(0) > 0.0)) return fit;
  fit.omega_0 = std::pow(c(0) / c(2), 0.25);
  const double width_sq = c(1) / c(2) + 2.0 * fit.omega_0 * fit.omega_0;
  if (!(width_sq > 0.0)) return fit;
  fit.linewidth = std::sqrt(width_sq);
  fit.amplitude = 1.0 / c(2);
  fit.ok = true;
  return fit;
}

}  // namespace optorot
