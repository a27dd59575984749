#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "phonsub/dynamics.hpp"
#include "phonsub/errors.hpp"
#include "phonsub/quadrature.hpp"

namespace phonsub {

/// Covariance matrix rescaled into the conditioning convention sigma = 2 v,
/// under which the joint vacuum maps to the identity and the Weyl
/// characteristic function is exp(-1/2 x sigma x^T). All conditioning
/// formulas read their block entries from sigma.
struct ConventionedCovariance {
  Eigen::Matrix4d sigma = Eigen::Matrix4d::Identity();
  double time = 0.0;

  Eigen::Matrix2d mech_block() const { return sigma.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d field_block() const { return sigma.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d cross_block() const { return sigma.topRightCorner<2, 2>(); }

  /// Inverse scaling back to the vacuum-1/2 convention.
  CovarianceMatrix to_covariance() const {
    CovarianceMatrix cov;
    cov.v = 0.5 * sigma;
    cov.time = time;
    return cov;
  }
};

inline ConventionedCovariance conditioning_convention(const CovarianceMatrix& cov) {
  ConventionedCovariance out;
  out.sigma = 2.0 * cov.v;
  out.time = cov.time;
  return out;
}

/// Mean photon number of the field mode, (f11 + f22 - 2) / 4 in the
/// conditioning convention. Serves as a relative heralding-rate diagnostic
/// for the subtraction event; zero at vacuum.
inline double heralding_weight(const ConventionedCovariance& state) {
  const Eigen::Matrix2d f = state.field_block();
  return 0.25 * (f(0, 0) + f(1, 1) - 2.0);
}

namespace detail {

inline void require_heraldable(double f11, double f22) {
  if (!(f11 + f22 > 2.0 + 1e-12)) {
    throw ZeroHeraldingError(
        "photon subtraction has vanishing probability: field mode is at "
        "vacuum (f11 + f22 <= 2 in the conditioning convention)");
  }
}

}  // namespace detail

/// Conditional Weyl characteristic function of the mechanical mode after a
/// single photon is subtracted from the field,
///   C_m(gamma) = (aleph / 4) exp(g1(gamma)) g2(gamma),
/// with the quadratic forms g1, g2 built from the sigma blocks and
/// aleph = 4 / (f11 + f22 - 2).
inline double conditional_characteristic(const ConventionedCovariance& state,
                                         std::complex<double> gamma) {
  const Eigen::Matrix2d m = state.mech_block();
  const Eigen::Matrix2d c = state.cross_block();
  const Eigen::Matrix2d f = state.field_block();
  detail::require_heraldable(f(0, 0), f(1, 1));
  const double aleph = 4.0 / (f(0, 0) + f(1, 1) - 2.0);

  const double gr = gamma.real(), gi = gamma.imag();
  const double g1 = -0.5 * m(1, 1) * gi * gi -
                    0.5 * gr * ((m(0, 1) + m(1, 0)) * gi + m(0, 0) * gr);
  const double g2 =
      -(c(1, 0) * c(1, 0) + c(1, 1) * c(1, 1)) * gi * gi -
      2.0 * (c(0, 0) * c(1, 0) + c(0, 1) * c(1, 1)) * gi * gr -
      (c(0, 0) * c(0, 0) + c(0, 1) * c(0, 1)) * gr * gr +
      f(0, 0) + f(1, 1) - 2.0;
  return 0.25 * aleph * std::exp(g1) * g2;
}

/// Closed-form conditional Wigner function of the mechanical mode,
///   W(dr, di) = A1 exp(A2) [B1 - B2 B3 / C^2 - B4 B5 / C + B6],
/// with every coefficient taken verbatim from the sigma blocks. The
/// evaluator is immutable after construction; point evaluations are pure.
class ConditionalWignerEvaluator {
 public:
  explicit ConditionalWignerEvaluator(const ConventionedCovariance& state)
      : time_(state.time) {
    const Eigen::Matrix2d m = state.mech_block();
    const Eigen::Matrix2d c = state.cross_block();
    const Eigen::Matrix2d f = state.field_block();
    m11_ = m(0, 0); m12_ = m(0, 1); m21_ = m(1, 0); m22_ = m(1, 1);
    c11_ = c(0, 0); c12_ = c(0, 1); c21_ = c(1, 0); c22_ = c(1, 1);
    f11_ = f(0, 0); f22_ = f(1, 1);

    detail::require_heraldable(f11_, f22_);
    aleph_ = 4.0 / (f11_ + f22_ - 2.0);

    const double ms = m12_ + m21_;
    big_c_ = ms * ms - 4.0 * m11_ * m22_;
    if (!(big_c_ < 0.0) || !(m11_ > 0.0)) {
      throw UnphysicalStateError(
          "conditional_wigner: mechanical block fails 4 m11 m22 > (m12+m21)^2");
    }
    a1_ = (aleph_ / constants::pi) * std::pow(1.0 / m11_, 2.5) *
          std::sqrt(m11_ / (4.0 * m11_ * m22_ - ms * ms));
    b2_ = 4.0 * (c21_ * c21_ + c22_ * c22_) * m11_ * m11_ -
          4.0 * (c11_ * c21_ + c12_ * c22_) * ms * m11_ +
          (c11_ * c11_ + c12_ * c12_) * ms * ms;
    b4_ = 8.0 * (c11_ * c11_ * ms - 2.0 * c21_ * c11_ * m11_ +
                 c12_ * (c12_ * ms - 2.0 * c22_ * m11_));
    b6_ = (f11_ + f22_ - 2.0) * m11_ * m11_;
  }

  double operator()(double delta_r, double delta_i) const {
    const double ms = m12_ + m21_;
    const double a2 = 8.0 *
                      (m22_ * delta_i * delta_i + ms * delta_i * delta_r +
                       m11_ * delta_r * delta_r) /
                      big_c_;
    const double b1 = -(c11_ * c11_ + c12_ * c12_) *
                      (m11_ - 4.0 * delta_i * delta_i);
    const double b3 = -4.0 * ms * ms * delta_i * delta_i -
                      ms * m11_ * (16.0 * delta_i * delta_r + ms) +
                      4.0 * m11_ * m11_ * (m22_ - 4.0 * delta_r * delta_r);
    const double b5 = ms * delta_i * delta_i + 2.0 * m11_ * delta_i * delta_r;
    return a1_ * std::exp(a2) *
           (b1 - b2_ * b3 / (big_c_ * big_c_) - b4_ * b5 / big_c_ + b6_);
  }

  double aleph() const { return aleph_; }
  double polynomial_discriminant() const { return big_c_; }
  double time() const { return time_; }

  /// The same function presented as polynomial * Gaussian, for the
  /// moment-based overlap integrals. The exponent matrix is -2 Q where
  /// A2 = delta^T Q delta; the A1 prefactor is folded into the polynomial.
  GaussianPolyForm gaussian_form() const {
    const double ms = m12_ + m21_;
    GaussianPolyForm form;
    // A2 = (8 / big_c) (m11 dr^2 + ms dr di + m22 di^2), big_c < 0.
    form.a(0, 0) = -16.0 * m11_ / big_c_;
    form.a(0, 1) = form.a(1, 0) = -8.0 * ms / big_c_;
    form.a(1, 1) = -16.0 * m22_ / big_c_;

    BivariatePoly bracket(2, 2);
    // B1 = -(c11^2 + c12^2)(m11 - 4 di^2)
    const double cr2 = c11_ * c11_ + c12_ * c12_;
    bracket.at(0, 0) += -cr2 * m11_;
    bracket.at(0, 2) += 4.0 * cr2;
    // -B2 B3 / C^2 with B3 quadratic.
    const double inv_c2 = 1.0 / (big_c_ * big_c_);
    bracket.at(0, 2) += -b2_ * inv_c2 * (-4.0 * ms * ms);
    bracket.at(1, 1) += -b2_ * inv_c2 * (-16.0 * ms * m11_);
    bracket.at(0, 0) += -b2_ * inv_c2 *
                        (-ms * ms * m11_ + 4.0 * m11_ * m11_ * m22_);
    bracket.at(2, 0) += -b2_ * inv_c2 * (-16.0 * m11_ * m11_);
    // -B4 B5 / C with B5 = ms di^2 + 2 m11 dr di.
    const double inv_c = 1.0 / big_c_;
    bracket.at(0, 2) += -b4_ * inv_c * ms;
    bracket.at(1, 1) += -b4_ * inv_c * 2.0 * m11_;
    // + B6.
    bracket.at(0, 0) += b6_;

    form.poly = bracket.scaled(a1_);
    return form;
  }

 private:
  double m11_, m12_, m21_, m22_;
  double c11_, c12_, c21_, c22_;
  double f11_, f22_;
  double aleph_, big_c_, a1_, b2_, b4_, b6_;
  double time_;
};

inline ConditionalWignerEvaluator conditional_wigner(
    const ConventionedCovariance& state) {
  return ConditionalWignerEvaluator(state);
}

}  // namespace phonsub
