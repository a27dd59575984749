#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>

#include "phonsub/dynamics.hpp"
#include "phonsub/errors.hpp"

namespace phonsub {

/// Symplectic spectrum of a 4x4 covariance matrix (vacuum variance 1/2):
/// the two moduli of the purely imaginary eigenvalues of Omega v, sorted
/// ascending. Physical states have both >= 1/2.
inline std::array<double, 2> symplectic_eigenvalues(const Eigen::Matrix4d& v) {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  const Eigen::Matrix4d m = omega * v;
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(m);
  if (solver.info() != Eigen::Success) {
    throw UnphysicalStateError("symplectic_eigenvalues: eigensolver failed");
  }
  // Eigenvalues come in +/- i nu pairs; collect the two distinct moduli.
  std::array<double, 4> moduli;
  for (int i = 0; i < 4; ++i) moduli[i] = std::abs(solver.eigenvalues()(i));
  std::sort(moduli.begin(), moduli.end());
  return {0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])};
}

/// True iff both symplectic eigenvalues respect the uncertainty bound
/// nu >= 1/2 - tol.
inline bool physicality_check(const CovarianceMatrix& cov, double tol = 1e-9) {
  const auto nu = symplectic_eigenvalues(detail::symmetrized(cov.v));
  return nu[0] >= 0.5 - tol && nu[1] >= 0.5 - tol;
}

/// Mean phonon occupancy implied by the mechanical block:
/// n_eff = (m11 + m22 - 1) / 2.
inline double effective_phonon(const CovarianceMatrix& cov) {
  return 0.5 * (cov.v(0, 0) + cov.v(1, 1) - 1.0);
}

/// Logarithmic negativity of the two-mode Gaussian state,
/// E_N = max(0, -ln 2 eta-), where eta- is the smallest symplectic
/// eigenvalue of the partially transposed covariance matrix:
///   eta- = sqrt((Sigma - sqrt(Sigma^2 - 4 det v)) / 2),
///   Sigma = det m + det f - 2 det c.
inline double logarithmic_negativity(const CovarianceMatrix& cov) {
  const Eigen::Matrix2d m = cov.mech_block();
  const Eigen::Matrix2d f = cov.field_block();
  const Eigen::Matrix2d c = cov.cross_block();
  const double sigma =
      m.determinant() + f.determinant() - 2.0 * c.determinant();
  const double det_v = cov.v.determinant();
  const double disc = sigma * sigma - 4.0 * det_v;
  if (disc < -1e-9 * std::max(sigma * sigma, 1.0)) {
    throw UnphysicalStateError(
        "logarithmic_negativity: negative discriminant beyond tolerance");
  }
  const double radicand = 0.5 * (sigma - std::sqrt(std::max(disc, 0.0)));
  if (radicand < -1e-12) {
    throw UnphysicalStateError(
        "logarithmic_negativity: negative symplectic radicand");
  }
  const double eta_minus = std::sqrt(std::max(radicand, 0.0));
  const double log_neg = -std::log(2.0 * eta_minus);
  // Values at round-off scale of the separability boundary are noise, not
  // entanglement; physical values in this problem sit many orders above.
  if (log_neg < 1e-14) return 0.0;
  return log_neg;
}

/// Covariance of a two-mode squeezed thermal state: thermal mechanical and
/// field modes with occupancies n_bar_mech and n_bar_field, acted on by the
/// two-mode squeeze of parameter r. The analytic test bed for the
/// conditioning formulas.
inline CovarianceMatrix two_mode_squeezed_thermal(double r, double n_bar_mech,
                                                  double n_bar_field = 0.0) {
  if (!(n_bar_mech >= 0.0) || !(n_bar_field >= 0.0)) {
    throw ParameterError("two_mode_squeezed_thermal: occupancies must be >= 0");
  }
  const double ch = std::cosh(r), sh = std::sinh(r);
  Eigen::Matrix4d s;
  s << ch, 0.0, sh, 0.0,
       0.0, ch, 0.0, -sh,
       sh, 0.0, ch, 0.0,
       0.0, -sh, 0.0, ch;
  CovarianceMatrix cov;
  const Eigen::Matrix4d v0 = Eigen::Vector4d(n_bar_mech + 0.5, n_bar_mech + 0.5,
                                             n_bar_field + 0.5,
                                             n_bar_field + 0.5)
                                 .asDiagonal();
  cov.v = detail::symmetrized(s * v0 * s.transpose());
  return cov;
}

}  // namespace phonsub
