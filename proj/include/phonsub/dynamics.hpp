#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "phonsub/errors.hpp"
#include "phonsub/params.hpp"

namespace phonsub {

/// Drift matrix of the linearized fluctuation dynamics over the quadrature
/// vector (dq, dp, dX, dY):
///
///   k = |   0     w_m    0    0  |
///       | -w_m  -gam_m   G    0  |
///       |   0     0     -k    D  |
///       |   G     0     -D   -k  |
struct DriftMatrix {
  Eigen::Matrix4d k;
};

/// Diagonal noise-injection matrix diag(0, gamma_m (2 n_bar + 1), kappa, kappa)
/// fixed by the Brownian and input-noise correlations under the same
/// quadrature conventions as DriftMatrix.
struct DiffusionMatrix {
  Eigen::Matrix4d d;
};

/// 4x4 symmetric matrix of quadrature second moments at a given time, with
/// vacuum variance 1/2. Block views: mechanical (m), field (f), cross (c).
struct CovarianceMatrix {
  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  double time = 0.0;  // seconds

  Eigen::Matrix2d mech_block() const { return v.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d field_block() const { return v.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d cross_block() const { return v.topRightCorner<2, 2>(); }
};

/// Routh-Hurwitz verdict: stable iff both polynomial constraints are positive.
struct StabilityReport {
  double c1 = 0.0;
  double c2 = 0.0;
  bool stable = false;
};

inline DriftMatrix drift_matrix(const DerivedParams& d) {
  const double wm = d.mech_freq, gm = d.mech_damping, g = d.g, kap = d.kappa,
               del = d.delta;
  DriftMatrix drift;
  drift.k << 0.0, wm, 0.0, 0.0,
             -wm, -gm, g, 0.0,
             0.0, 0.0, -kap, del,
             g, 0.0, -del, -kap;
  if (!drift.k.allFinite()) {
    throw ParameterError("drift_matrix: non-finite entries");
  }
  return drift;
}

inline DiffusionMatrix diffusion_matrix(const DerivedParams& d) {
  if (!(d.n_bar >= 0.0)) {
    throw ParameterError("diffusion_matrix: n_bar must be >= 0");
  }
  DiffusionMatrix diff;
  diff.d = Eigen::Vector4d(0.0, d.mech_damping * (2.0 * d.n_bar + 1.0), d.kappa,
                           d.kappa)
               .asDiagonal();
  return diff;
}

/// Evaluates the two nontrivial Routh-Hurwitz constraints of the quartic
/// characteristic polynomial of the drift matrix. c2 is det(k) up to a
/// positive factor (static instability); c1 is the third Hurwitz determinant
/// (dynamic instability).
inline StabilityReport stability_check(const DerivedParams& d) {
  const double wm = d.mech_freq, gm = d.mech_damping, g = d.g, kap = d.kappa,
               del = d.delta;
  StabilityReport report;
  const double two_kap_gm = 2.0 * kap + gm;
  const double del2_kap2 = del * del + kap * kap;
  report.c1 = del * g * g * wm * two_kap_gm * two_kap_gm +
              4.0 * kap * gm * wm * wm * (-del * del + kap * kap + kap * gm) +
              2.0 * kap * del2_kap2 * gm *
                  (del2_kap2 + 2.0 * kap * gm + gm * gm) +
              2.0 * kap * gm * wm * wm * wm * wm;
  report.c2 = -del * g * g * wm + del * del * wm * wm + kap * kap * wm * wm;
  report.stable = report.c1 > 0.0 && report.c2 > 0.0;
  return report;
}

/// Thermal mechanical mode and vacuum field at t = 0:
/// v(0) = (n_bar + 1/2) I_2  (+)  1/2 I_2.
inline CovarianceMatrix initial_covariance(double n_bar) {
  if (!(n_bar >= 0.0)) {
    throw ParameterError("initial_covariance: n_bar must be >= 0");
  }
  CovarianceMatrix cov;
  cov.v = Eigen::Vector4d(n_bar + 0.5, n_bar + 0.5, 0.5, 0.5).asDiagonal();
  cov.time = 0.0;
  return cov;
}

namespace detail {

inline Eigen::Matrix4d symmetrized(const Eigen::Matrix4d& v) {
  return 0.5 * (v + v.transpose());
}

/// Reusable spectral propagator exp(k t) = V exp(diag(lambda) t) V^{-1}.
/// Falls back to Pade scaling-and-squaring when the eigenbasis cannot
/// reconstruct k to high accuracy (defective or near-defective k).
class DriftPropagator {
 public:
  explicit DriftPropagator(const Eigen::Matrix4d& k) : k_(k) {
    Eigen::EigenSolver<Eigen::Matrix4d> solver(k);
    if (solver.info() == Eigen::Success) {
      eigenvalues_ = solver.eigenvalues();
      const Eigen::Matrix4cd vectors = solver.eigenvectors();
      Eigen::FullPivLU<Eigen::Matrix4cd> lu(vectors);
      if (lu.isInvertible()) {
        vectors_ = vectors;
        inverse_vectors_ = lu.inverse();
        const Eigen::Matrix4cd rebuilt =
            vectors_ * eigenvalues_.asDiagonal() * inverse_vectors_;
        const double residual = (rebuilt - k.cast<std::complex<double>>())
                                    .cwiseAbs()
                                    .maxCoeff();
        const double scale = std::max(k.cwiseAbs().maxCoeff(), 1.0);
        spectral_ok_ = residual < 1e-10 * scale;
      }
    }
  }

  Eigen::Matrix4d exp_kt(double t) const {
    if (spectral_ok_) {
      Eigen::Vector4cd phases;
      for (int i = 0; i < 4; ++i) {
        phases(i) = std::exp(eigenvalues_(i) * t);
      }
      const Eigen::Matrix4cd m = vectors_ * phases.asDiagonal() * inverse_vectors_;
      // exp(k t) is real for real k; the imaginary residue is round-off.
      const double imag = m.imag().cwiseAbs().maxCoeff();
      const double real = std::max(m.real().cwiseAbs().maxCoeff(), 1e-300);
      if (imag < 1e-10 * std::max(real, 1.0)) {
        return m.real();
      }
    }
    return (k_ * t).exp();
  }

  double max_real_eigenvalue() const {
    return eigenvalues_.real().maxCoeff();
  }

 private:
  Eigen::Matrix4d k_;
  Eigen::Vector4cd eigenvalues_ = Eigen::Vector4cd::Zero();
  Eigen::Matrix4cd vectors_;
  Eigen::Matrix4cd inverse_vectors_;
  bool spectral_ok_ = false;
};

/// Index map for the 10 independent entries of a symmetric 4x4 matrix.
inline int symmetric_index(int i, int j) {
  if (i > j) std::swap(i, j);
  // row-major upper triangle: (0,0)=0 (0,1)=1 ... (0,3)=3 (1,1)=4 ...
  static constexpr int offset[4] = {0, 4, 7, 9};
  return offset[i] + (j - i);
}

}  // namespace detail

/// Unique symmetric solution of k v + v k^T + D = 0, via the linear system
/// over the 10 independent symmetric entries. Requires a strictly stable k.
inline CovarianceMatrix steady_state_covariance(const DriftMatrix& drift,
                                                const DiffusionMatrix& diffusion) {
  const Eigen::Matrix4d& k = drift.k;
  Eigen::Matrix<double, 10, 10> a = Eigen::Matrix<double, 10, 10>::Zero();
  Eigen::Matrix<double, 10, 1> rhs = Eigen::Matrix<double, 10, 1>::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const int row = detail::symmetric_index(i, j);
      // (k v + v k^T)_{ij} = sum_l k_{il} v_{lj} + v_{il} k_{jl}
      for (int l = 0; l < 4; ++l) {
        a(row, detail::symmetric_index(l, j)) += k(i, l);
        a(row, detail::symmetric_index(i, l)) += k(j, l);
      }
      rhs(row) = -diffusion.d(i, j);
    }
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 10, 10>> lu(a);
  if (!lu.isInvertible()) {
    throw InstabilityError(
        "steady_state_covariance: Lyapunov system is singular (drift matrix "
        "is marginal or unstable)");
  }
  const Eigen::Matrix<double, 10, 1> x = lu.solve(rhs);
  CovarianceMatrix cov;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      cov.v(i, j) = cov.v(j, i) = x(detail::symmetric_index(i, j));
    }
  }
  cov.v = detail::symmetrized(cov.v);
  cov.time = std::numeric_limits<double>::infinity();
  if (!cov.v.allFinite()) {
    throw InstabilityError("steady_state_covariance: non-finite solution");
  }
  return cov;
}

namespace detail {

/// Closed-form propagation for stable k:
///   v(t) = v_ss + exp(k t) (v0 - v_ss) exp(k^T t).
inline Eigen::Matrix4d evolve_stable(const DriftPropagator& propagator,
                                     const Eigen::Matrix4d& v_ss,
                                     const Eigen::Matrix4d& v0, double t) {
  const Eigen::Matrix4d m = propagator.exp_kt(t);
  return v_ss + m * (v0 - v_ss) * m.transpose();
}

/// Fallback for marginal (non-strictly-stable) k: vectorize the equation of
/// motion, vec(v)' = K vec(v) + vec(D) with K = k (x) I + I (x) k, and read
/// both exp(K t) and its integral off one block matrix exponential.
inline Eigen::Matrix4d evolve_vectorized(const Eigen::Matrix4d& k,
                                         const Eigen::Matrix4d& d,
                                         const Eigen::Matrix4d& v0, double t) {
  Eigen::Matrix<double, 16, 16> big = Eigen::Matrix<double, 16, 16>::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int l = 0; l < 4; ++l) {
        big(4 * i + j, 4 * l + j) += k(i, l);  // k (x) I
        big(4 * i + j, 4 * i + l) += k(j, l);  // I (x) k
      }
    }
  }
  Eigen::Matrix<double, 32, 32> block = Eigen::Matrix<double, 32, 32>::Zero();
  block.topLeftCorner<16, 16>() = big * t;
  block.topRightCorner<16, 16>() = Eigen::Matrix<double, 16, 16>::Identity() * t;
  const Eigen::Matrix<double, 32, 32> e = block.exp();
  Eigen::Matrix<double, 16, 1> v0_vec, d_vec;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      v0_vec(4 * i + j) = v0(i, j);
      d_vec(4 * i + j) = d(i, j);
    }
  }
  const Eigen::Matrix<double, 16, 1> v_vec =
      e.topLeftCorner<16, 16>() * v0_vec + e.topRightCorner<16, 16>() * d_vec;
  Eigen::Matrix4d v;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      v(i, j) = v_vec(4 * i + j);
    }
  }
  return v;
}

}  // namespace detail

/// Propagates the covariance equation of motion v' = k v + v k^T + D from
/// v0 over a duration t. Uses the exact closed form around the steady state
/// when k is strictly stable; otherwise falls back to the vectorized linear
/// propagator. The result is symmetrized and carries timestamp v0.time + t.
inline CovarianceMatrix evolve_covariance(const DriftMatrix& drift,
                                          const DiffusionMatrix& diffusion,
                                          const CovarianceMatrix& v0, double t) {
  if (!(t >= 0.0)) {
    throw ParameterError("evolve_covariance: t must be >= 0");
  }
  CovarianceMatrix out;
  out.time = v0.time + t;
  if (t == 0.0) {  // identity of the flow
    out.v = v0.v;
    return out;
  }
  const detail::DriftPropagator propagator(drift.k);
  if (propagator.max_real_eigenvalue() < 0.0) {
    const CovarianceMatrix v_ss = steady_state_covariance(drift, diffusion);
    out.v = detail::symmetrized(
        detail::evolve_stable(propagator, v_ss.v, v0.v, t));
  } else {
    out.v = detail::symmetrized(
        detail::evolve_vectorized(drift.k, diffusion.d, v0.v, t));
  }
  if (!out.v.allFinite()) {
    std::ostringstream os;
    os << "evolve_covariance: non-finite covariance at t = " << t
       << " s (unstable drift matrix)";
    throw InstabilityError(os.str());
  }
  return out;
}

/// evolve_covariance applied to each time point, sharing one spectral
/// decomposition of k and one steady-state solve across the series.
inline std::vector<CovarianceMatrix> evolve_series(
    const DriftMatrix& drift, const DiffusionMatrix& diffusion,
    const CovarianceMatrix& v0, std::span<const double> times) {
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i] <= times[i + 1])) {
      throw ParameterError("evolve_series: times must be sorted ascending");
    }
  }
  std::vector<CovarianceMatrix> series;
  series.reserve(times.size());
  const detail::DriftPropagator propagator(drift.k);
  const bool stable = propagator.max_real_eigenvalue() < 0.0;
  Eigen::Matrix4d v_ss = Eigen::Matrix4d::Zero();
  if (stable) {
    v_ss = steady_state_covariance(drift, diffusion).v;
  }
  for (const double t : times) {
    if (!(t >= 0.0)) {
      throw ParameterError("evolve_series: times must be >= 0");
    }
    CovarianceMatrix out;
    out.time = v0.time + t;
    out.v = t == 0.0
                ? v0.v
                : detail::symmetrized(
                      stable ? detail::evolve_stable(propagator, v_ss, v0.v, t)
                             : detail::evolve_vectorized(drift.k, diffusion.d,
                                                         v0.v, t));
    if (!out.v.allFinite()) {
      std::ostringstream os;
      os << "evolve_series: non-finite covariance at t = " << t << " s";
      throw InstabilityError(os.str());
    }
    series.push_back(out);
  }
  return series;
}

}  // namespace phonsub
