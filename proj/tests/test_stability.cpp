#include "optorot/stability.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace optorot;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  return m;
}

double max_real_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace

TEST_CASE("trivial verdicts") {
  const Eigen::MatrixXd minus_identity = -Eigen::MatrixXd::Identity(4, 4);
  CHECK(routh_hurwitz_stable(minus_identity) == Stability::stable);
  Eigen::MatrixXd m = minus_identity;
  m(2, 2) = 1.0;
  CHECK(routh_hurwitz_stable(m) == Stability::unstable);

  Eigen::MatrixXd rotation(2, 2);
  rotation << 0.0, 1.0, -1.0, 0.0;
  CHECK(routh_hurwitz_stable(rotation) == Stability::marginal);
  Eigen::MatrixXd singular = minus_identity;
  singular(3, 3) = 0.0;
  CHECK(routh_hurwitz_stable(singular) == Stability::marginal);

  m = minus_identity;
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(routh_hurwitz_stable(m), std::domain_error);
}

TEST_CASE("characteristic polynomial matches the eigenvalues") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    const auto m = random_matrix(rng, n);
    const auto coeffs = characteristic_polynomial(m);
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    // prod (s - lambda_i) expanded term by term
    Eigen::VectorXcd poly = Eigen::VectorXcd::Zero(n + 1);
    poly(0) = 1.0;
    for (int i = 0; i < n; ++i) {
      const auto lambda = es.eigenvalues()(i);
      for (int k = i + 1; k >= 1; --k) poly(k) -= lambda * poly(k - 1);
    }
    for (int k = 0; k <= n; ++k)
      CHECK(std::abs(poly(k) - coeffs(k)) < 1e-9 * std::max(1.0, std::abs(coeffs(k))));
  }
}

TEST_CASE("Routh-Hurwitz agrees with eigenvalues on random matrices") {
  std::mt19937_64 rng(17);
  int disagreements = 0, marginal = 0, stable = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const int n = 2 + trial % 7;
    Eigen::MatrixXd m = random_matrix(rng, n);
    // shift half the samples towards stability so both verdicts occur
    if (trial % 2 == 0) m.diagonal().array() -= 1.5;
    const auto verdict = routh_hurwitz_stable(m);
    if (verdict == Stability::marginal) {
      ++marginal;
      continue;
    }
    const bool eig_stable = max_real_eigenvalue(m) < 0.0;
    if (eig_stable != (verdict == Stability::stable)) ++disagreements;
    if (eig_stable) ++stable;
  }
  CHECK(disagreements == 0);
  CHECK(marginal < 5);
  CHECK(stable > 300);
}

TEST_CASE("badly scaled stable systems stay stable") {
  // Fast damped pair weakly coupled to a slow damped oscillator: roots spread
  // over many decades, nothing near the imaginary axis.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double fast = std::pow(10.0, 6.0 + 3.0 * u(rng));
    const double slow = std::pow(10.0, 2.0 + 2.0 * u(rng));
    const double damp = slow * std::pow(10.0, -4.0 + 3.0 * u(rng));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m << -fast, 2.0 * fast, 0.0, 0.0,
         -2.0 * fast, -fast, 1e-3 * fast, 0.0,
         0.0, 0.0, 0.0, 1e18,
         1e-20 * slow, 0.0, -slow * slow * 1e-18, -damp;
    const double abscissa = spectral_abscissa(m);
    CAPTURE(abscissa);
    if (abscissa < -1e-6 * damp) CHECK(routh_hurwitz_stable(m) == Stability::stable);
  }
}

TEST_CASE("balancing is an exact similarity") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 1e10, 0.0, 1e-10, 2.0, 1e8, 0.0, 1e-8, 3.0;
  const auto b = balance(m);
  const Eigen::MatrixXd back = b.scale.asDiagonal() * b.matrix * b.scale.cwiseInverse().asDiagonal();
  CHECK((back - m).norm() <= 1e-15 * m.norm());
  CHECK(b.matrix.cwiseAbs().maxCoeff() < 1e3);
}

TEST_CASE("transfer function equals the resolvent entry") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_matrix(rng, 4);
    const double omega = 0.37 * (trial + 1);
    Eigen::MatrixXcd r = -m.cast<std::complex<double>>();
    r.diagonal().array() += std::complex<double>(0.0, -omega);
    const Eigen::MatrixXcd inv = r.inverse();
    const auto h = transfer_function(m, 3, 2, omega);
    CHECK(std::abs(h - inv(2, 3)) < 1e-10 * std::abs(inv(2, 3)));
  }
}
