#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "phonsub/dynamics.hpp"
#include "phonsub/errors.hpp"
#include "phonsub/gaussian.hpp"

namespace phonsub {

/// Mechanical density matrix in the truncated number basis, the output of
/// the brute-force conditioning oracle. Hermitian, unit trace, positive
/// semidefinite up to round-off.
struct FockDensityMatrix {
  Eigen::MatrixXcd rho;
  int n_max = 0;

  double population(int n) const { return rho(n, n).real(); }

  std::vector<double> populations() const {
    std::vector<double> p(n_max + 1);
    for (int n = 0; n <= n_max; ++n) p[n] = population(n);
    return p;
  }
};

namespace fock_detail {

/// Generalized Laguerre polynomial L_n^(k)(x) by the three-term recurrence.
inline double generalized_laguerre(int n, int k, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double curr = 1.0 + k - x;
  for (int i = 2; i <= n; ++i) {
    const double next =
        ((2.0 * i - 1.0 + k - x) * curr - (i - 1.0 + k) * prev) / i;
    prev = curr;
    curr = next;
  }
  return curr;
}

/// Displaced-number-state matrix element <n|D(beta)|m> with
/// D(beta) = exp(beta a^dag - beta* a).
inline std::complex<double> displaced_element(int n, int m,
                                              std::complex<double> beta) {
  const double x = std::norm(beta);
  const int lo = std::min(n, m);
  const int hi = std::max(n, m);
  double log_ratio = 0.0;  // log(lo! / hi!)
  for (int i = lo + 1; i <= hi; ++i) log_ratio -= std::log(double(i));
  const double magnitude = std::exp(0.5 * log_ratio - 0.5 * x);
  const double laguerre = generalized_laguerre(lo, hi - lo, x);
  if (n >= m) {
    return magnitude * std::pow(beta, n - m) * laguerre;
  }
  return magnitude * std::pow(-std::conj(beta), m - n) * laguerre;
}

inline Eigen::MatrixXd annihilation(int dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

/// Recover (r, n_bar_mech, n_bar_field) of a canonical two-mode squeezed
/// thermal covariance and verify the reconstruction; the oracle only
/// accepts states reachable by that constructor.
struct SqueezedThermalParams {
  double r = 0.0;
  double n_bar_mech = 0.0;
  double n_bar_field = 0.0;
};

inline SqueezedThermalParams recover_squeezed_thermal(const CovarianceMatrix& cov) {
  // m11 + f11 = S cosh(2r), c11 = S cosh(r) sinh(r), m11 - f11 = nm - nf,
  // with S = nm + nf + 1.
  SqueezedThermalParams p;
  const double sum = cov.v(0, 0) + cov.v(2, 2);
  p.r = 0.5 * std::atanh(2.0 * cov.v(0, 2) / sum);
  const double total = sum / std::cosh(2.0 * p.r);
  const double difference = cov.v(0, 0) - cov.v(2, 2);
  p.n_bar_mech = 0.5 * (total - 1.0 + difference);
  p.n_bar_field = 0.5 * (total - 1.0 - difference);
  if (p.n_bar_mech < 0.0 && p.n_bar_mech > -1e-12) p.n_bar_mech = 0.0;
  if (p.n_bar_field < 0.0 && p.n_bar_field > -1e-12) p.n_bar_field = 0.0;
  bool match = p.n_bar_mech >= 0.0 && p.n_bar_field >= 0.0 &&
               std::isfinite(p.r);
  if (match) {
    const CovarianceMatrix rebuilt =
        two_mode_squeezed_thermal(p.r, p.n_bar_mech, p.n_bar_field);
    match = (rebuilt.v - cov.v).cwiseAbs().maxCoeff() <=
            1e-8 * std::max(1.0, cov.v.cwiseAbs().maxCoeff());
  }
  if (!match) {
    throw ParameterError(
        "fock_oracle_conditional: covariance is not a canonical two-mode "
        "squeezed thermal state");
  }
  return p;
}

}  // namespace fock_detail

/// Brute-force conditional state: builds the two-mode squeezed thermal
/// state in the truncated number basis (mechanical (x) field), applies the
/// field annihilation operator rho -> a rho a^dag, traces out the field and
/// normalizes. Entirely independent of the closed-form conditioning chain.
inline FockDensityMatrix fock_oracle_conditional(const CovarianceMatrix& cov,
                                                 int n_max) {
  if (n_max < 1) {
    throw ParameterError("fock_oracle_conditional: n_max must be >= 1");
  }
  const auto params = fock_detail::recover_squeezed_thermal(cov);

  // Build with headroom so boundary distortion of the truncated squeeze
  // unitary stays away from the returned block.
  const int pad = 8;
  const int dim = n_max + 1 + pad;
  const Eigen::MatrixXd a = fock_detail::annihilation(dim);
  const Eigen::MatrixXd ad = a.transpose();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);

  auto kron = [dim](const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd out(dim * dim, dim * dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        out.block(i * dim, j * dim, dim, dim) = lhs(i, j) * rhs;
      }
    }
    return out;
  };

  // Two-mode squeeze generator r (a_m^dag a_f^dag - a_m a_f): real
  // antisymmetric, so the truncated unitary is orthogonal.
  const Eigen::MatrixXd generator =
      params.r * (kron(ad, ad) - kron(a, a));
  const Eigen::MatrixXd squeeze = generator.exp();

  // Thermal mechanical mode (x) thermal field mode.
  const auto thermal_weights = [dim](double n_bar) {
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(dim);
    if (n_bar > 0.0) {
      const double q = n_bar / (n_bar + 1.0);
      double w = 1.0 / (n_bar + 1.0);
      for (int n = 0; n < dim; ++n) {
        weights(n) = w;
        w *= q;
      }
    } else {
      weights(0) = 1.0;
    }
    return weights;
  };
  const Eigen::VectorXd thermal_mech = thermal_weights(params.n_bar_mech);
  const Eigen::VectorXd thermal_field = thermal_weights(params.n_bar_field);
  Eigen::VectorXd joint_diag(dim * dim);
  for (int n = 0; n < dim; ++n) {
    for (int l = 0; l < dim; ++l) {
      joint_diag(n * dim + l) = thermal_mech(n) * thermal_field(l);
    }
  }

  Eigen::MatrixXd rho_joint =
      squeeze * joint_diag.asDiagonal() * squeeze.transpose();

  // Photon subtraction on the field mode.
  const Eigen::MatrixXd a_field = kron(identity, a);
  rho_joint = a_field * rho_joint * a_field.transpose();

  const double herald_trace = rho_joint.trace();
  if (!(herald_trace > 0.0)) {
    throw ZeroHeraldingError(
        "fock_oracle_conditional: subtraction event has zero weight");
  }

  // Partial trace over the field.
  Eigen::MatrixXd rho_mech = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (int l = 0; l < dim; ++l) {
        acc += rho_joint(i * dim + l, j * dim + l);
      }
      rho_mech(i, j) = acc;
    }
  }
  rho_mech /= rho_mech.trace();

  const double kept = rho_mech.topLeftCorner(n_max + 1, n_max + 1).trace();
  if (kept < 1.0 - 1e-8) {
    throw TruncationError(
        "fock_oracle_conditional: truncation leakage above 1e-8, raise n_max");
  }

  FockDensityMatrix out;
  out.n_max = n_max;
  out.rho = (rho_mech.topLeftCorner(n_max + 1, n_max + 1) / kept)
                .cast<std::complex<double>>();
  return out;
}

/// Weyl characteristic function tr[rho D(gamma)] of a truncated state.
inline std::complex<double> fock_characteristic(const FockDensityMatrix& state,
                                                std::complex<double> gamma) {
  std::complex<double> acc = 0.0;
  for (int m = 0; m <= state.n_max; ++m) {
    for (int n = 0; n <= state.n_max; ++n) {
      const std::complex<double> entry = state.rho(m, n);
      if (std::abs(entry) == 0.0) continue;
      acc += entry * fock_detail::displaced_element(n, m, gamma);
    }
  }
  return acc;
}

/// Wigner function of a truncated state through the displaced-parity form
/// W(delta) = (2/pi) tr[rho D(2 delta) Pi].
inline double fock_wigner_from_density(const FockDensityMatrix& state,
                                       std::complex<double> delta) {
  const std::complex<double> beta = 2.0 * delta;
  std::complex<double> acc = 0.0;
  for (int m = 0; m <= state.n_max; ++m) {
    const double parity = (m % 2 == 0) ? 1.0 : -1.0;
    for (int n = 0; n <= state.n_max; ++n) {
      const std::complex<double> entry = state.rho(m, n);
      if (std::abs(entry) == 0.0) continue;
      acc += entry * parity * fock_detail::displaced_element(n, m, beta);
    }
  }
  return (2.0 / constants::pi) * acc.real();
}

}  // namespace phonsub
