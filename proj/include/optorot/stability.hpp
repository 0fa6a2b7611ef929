#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace optorot {

enum class Stability { stable, unstable, marginal };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Diagonal similarity D^-1 A D with power-of-two entries in D, so the
/// transform is exact in floating point. Row and column norms are equalised
/// as in the Parlett-Reinsch procedure.
template <typename Scalar>
struct Balanced {
  DenseMatrix<Scalar> matrix;
  DenseVector<Scalar> scale;  // diagonal of D
};

template <typename Derived>
Balanced<typename Derived::Scalar> balance(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  const Eigen::Index n = a.rows();
  Balanced<Scalar> out{a.eval(), DenseVector<Scalar>::Ones(n)};
  auto& m = out.matrix;
  const Scalar radix = Scalar(2);
  bool converged = false;
  for (int sweep = 0; sweep < 200 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += abs(m(j, i));
        r += abs(m(i, j));
      }
      if (c == Scalar(0) || r == Scalar(0)) continue;
      Scalar f = 1;
      const Scalar s = c + r;
      while (c < r / radix) {
        c *= radix;
        r /= radix;
        f *= radix;
      }
      while (c >= r * radix) {
        c /= radix;
        r *= radix;
        f /= radix;
      }
      if (c + r < Scalar(0.95) * s) {
        converged = false;
        out.scale(i) *= f;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
  return out;
}

/// Monic characteristic polynomial det(sI - A) = s^n + c_1 s^{n-1} + ... + c_n,
/// returned as (1, c_1, ..., c_n). Coefficients are sums of principal minors,
/// which stays accurate for the small systems used here (n <= ~10).
/// `magnitude`, when given, receives the sum of |minor| behind each
/// coefficient: the scale against which cancellation is judged.
template <typename Derived>
DenseVector<typename Derived::Scalar> characteristic_polynomial(
    const Eigen::MatrixBase<Derived>& a,
    DenseVector<typename Derived::Scalar>* magnitude = nullptr) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  const int n = static_cast<int>(a.rows());
  if (a.rows() != a.cols()) throw std::invalid_argument("characteristic_polynomial: not square");
  if (n > 16) throw std::invalid_argument("characteristic_polynomial: matrix too large");
  DenseVector<Scalar> coeffs = DenseVector<Scalar>::Zero(n + 1);
  DenseVector<Scalar> sums = DenseVector<Scalar>::Zero(n + 1);
  coeffs(0) = sums(0) = Scalar(1);
  std::vector<int> idx;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    const DenseMatrix<Scalar> sub = a(idx, idx);
    const Scalar minor = sub.determinant();
    coeffs(k) += (k % 2 == 0) ? minor : -minor;
    // |det| alone understates the rounding of a cancelling determinant;
    // the product of row norms bounds every term of its expansion.
    Scalar bound = 1;
    for (int i = 0; i < k; ++i) bound *= sub.row(i).norm();
    sums(k) += bound;
  }
  if (magnitude) *magnitude = sums;
  return coeffs;
}

/// First column of the Routh array of a monic polynomial, after rescaling s
/// so the coefficients are O(1). Each entry carries a first-order bound on
/// its absolute error, seeded by `coeff_error` (absolute, same scaling as
/// `monic`) and propagated through the array recurrence. The k-th Hurwitz
/// determinant is the product of the first k+1 entries (entry 0 is 1).
template <typename Scalar>
struct RouthColumn {
  DenseVector<Scalar> value;
  DenseVector<Scalar> error;
};

template <typename Scalar>
RouthColumn<Scalar> routh_column(const DenseVector<Scalar>& monic,
                                 const DenseVector<Scalar>& coeff_error) {
  using std::abs;
  using std::pow;
  const Eigen::Index n = monic.size() - 1;
  DenseVector<Scalar> c = monic;
  DenseVector<Scalar> e = coeff_error;
  // s -> rho s maps roots to roots / rho and keeps the sign of their real parts.
  Scalar rho = 0;
  for (Eigen::Index k = 1; k <= n; ++k)
    rho = std::max<Scalar>(rho, pow(abs(c(k)), Scalar(1) / Scalar(k)));
  if (rho > Scalar(0)) {
    for (Eigen::Index k = 1; k <= n; ++k) {
      c(k) /= pow(rho, Scalar(k));
      e(k) /= pow(rho, Scalar(k));
    }
  }

  const Eigen::Index width = n / 2 + 1;
  DenseMatrix<Scalar> val = DenseMatrix<Scalar>::Zero(n + 1, width + 1);
  DenseMatrix<Scalar> err = DenseMatrix<Scalar>::Zero(n + 1, width + 1);
  for (Eigen::Index k = 0; k <= n; ++k) {
    val(k % 2, k / 2) = c(k);
    err(k % 2, k / 2) = e(k);
  }
  const Scalar u = std::numeric_limits<Scalar>::epsilon();
  RouthColumn<Scalar> col{DenseVector<Scalar>::Zero(n + 1), DenseVector<Scalar>::Zero(n + 1)};
  col.value(0) = val(0, 0);
  col.error(0) = err(0, 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i >= 2) {
      const Scalar p = val(i - 1, 0), q = val(i - 2, 0);
      if (p == Scalar(0)) break;  // caller sees a zero pivot as unresolved
      for (Eigen::Index j = 0; j < width; ++j) {
        const Scalar a = p * val(i - 2, j + 1);
        const Scalar b = q * val(i - 1, j + 1);
        const Scalar x = (a - b) / p;
        const Scalar numerator_err = abs(p) * err(i - 2, j + 1) + abs(val(i - 2, j + 1)) * err(i - 1, 0) +
                                     abs(q) * err(i - 1, j + 1) + abs(val(i - 1, j + 1)) * err(i - 2, 0);
        val(i, j) = x;
        err(i, j) = (numerator_err + abs(x) * err(i - 1, 0)) / abs(p) +
                    Scalar(4) * u * (abs(a) + abs(b)) / abs(p);
      }
    }
    col.value(i) = val(i, 0);
    col.error(i) = err(i, 0);
  }
  return col;
}

inline constexpr double kMarginalTolerance = 1e-12;

/// Routh-Hurwitz classification of dx/dt = A x. Stable iff every entry of the
/// first Routh column (equivalently every Hurwitz determinant) is strictly
/// positive. A characteristic-polynomial coefficient that is clearly negative
/// already proves instability, even when a Hurwitz determinant vanishes
/// (roots symmetric about the imaginary axis). Otherwise an entry whose sign
/// is not resolved by its propagated error bound makes the verdict marginal.
/// `tolerance` is the relative error assumed for each coefficient, on top of
/// the rounding bound of the minor sums.
template <typename Derived>
Stability routh_hurwitz_stable(const Eigen::MatrixBase<Derived>& a,
                               double tolerance = kMarginalTolerance) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  if (!a.allFinite()) throw std::domain_error("routh_hurwitz_stable: non-finite matrix entry");
  const auto balanced = balance(a);
  DenseVector<Scalar> magnitude;
  const auto coeffs = characteristic_polynomial(balanced.matrix, &magnitude);
  const Scalar u = std::numeric_limits<Scalar>::epsilon();
  const Scalar n = static_cast<Scalar>(a.rows());
  DenseVector<Scalar> error(coeffs.size());
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    error(k) = Scalar(tolerance) * abs(coeffs(k)) + Scalar(4) * n * u * magnitude(k);
  error(0) = 0;

  bool unresolved = false;
  for (Eigen::Index k = 1; k < coeffs.size(); ++k) {
    if (coeffs(k) < -error(k)) return Stability::unstable;
    if (coeffs(k) <= error(k)) unresolved = true;
  }
  if (unresolved) return Stability::marginal;

  const auto col = routh_column<Scalar>(coeffs, error);
  for (Eigen::Index k = 1; k < col.value.size(); ++k) {
    if (abs(col.value(k)) <= col.error(k)) return Stability::marginal;
    if (col.value(k) < Scalar(0)) return Stability::unstable;
  }
  return Stability::stable;
}

/// Largest real part of the spectrum, from a dense eigensolver.
template <typename Derived>
typename Derived::Scalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const auto balanced = balance(a);
  Eigen::EigenSolver<DenseMatrix<Scalar>> solver(balanced.matrix, false);
  return solver.eigenvalues().real().maxCoeff();
}

/// Frequency-domain response of dx/dt = A x + e_in f(t): the `out` component
/// of (-i omega - A)^{-1} e_in. Uses the e^{-i omega t} convention, so a
/// damped oscillator has Im chi > 0 at positive omega.
template <typename Derived>
std::complex<typename Derived::Scalar> transfer_function(const Eigen::MatrixBase<Derived>& a,
                                                         Eigen::Index in, Eigen::Index out,
                                                         typename Derived::Scalar omega) {
  using Scalar = typename Derived::Scalar;
  using Complex = std::complex<Scalar>;
  const auto balanced = balance(a);
  const Eigen::Index n = a.rows();
  // With A = D Ab D^-1: (-i w - A)^{-1} = D (-i w - Ab)^{-1} D^-1.
  DenseMatrix<Complex> m = -balanced.matrix.template cast<Complex>();
  m.diagonal().array() += Complex(0, -omega);
  DenseVector<Complex> rhs = DenseVector<Complex>::Zero(n);
  rhs(in) = Complex(Scalar(1) / balanced.scale(in));
  Eigen::FullPivLU<DenseMatrix<Complex>> lu(m);
  if (!lu.isInvertible()) throw std::domain_error("transfer_function: pole at this frequency");
  const DenseVector<Complex> v = lu.solve(rhs);
  return balanced.scale(out) * v(out);
}

}  // namespace optorot
