#include <catch2/catch.hpp>
#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace phonsub;

namespace {

// Independent route to the logarithmic negativity: smallest symplectic
// eigenvalue of the partially transposed covariance matrix.
double log_negativity_via_partial_transpose(const CovarianceMatrix& cov) {
  Eigen::Matrix4d flip = Eigen::Matrix4d::Identity();
  flip(3, 3) = -1.0;  // momentum reversal on the field mode
  const Eigen::Matrix4d transposed = flip * cov.v * flip;
  const auto nu = symplectic_eigenvalues(transposed);
  return std::max(0.0, -std::log(2.0 * nu[0]));
}

CovarianceMatrix rotated_locally(const CovarianceMatrix& cov, double angle_m,
                                 double angle_f) {
  auto rotation = [](double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
    return r;
  };
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s.topLeftCorner<2, 2>() = rotation(angle_m);
  s.bottomRightCorner<2, 2>() = rotation(angle_f);
  CovarianceMatrix out;
  out.v = detail::symmetrized(s * cov.v * s.transpose());
  out.time = cov.time;
  return out;
}

}  // namespace

TEST_CASE("effective phonon number", "[gaussian]") {
  CHECK(effective_phonon(initial_covariance(0.0)) == 0.0);
  CHECK(effective_phonon(initial_covariance(0.37)) == Approx(0.37));

  const DerivedParams d = testsupport::reference_derived();
  const DriftMatrix k = drift_matrix(d);
  const DiffusionMatrix diff = diffusion_matrix(d);
  const CovarianceMatrix v0 = initial_covariance(d.n_bar);
  std::vector<double> times;
  for (int i = 0; i <= 60; ++i) times.push_back(3e-6 * i);
  times.push_back(0.05);  // deep in the steady-state window
  for (const auto& cov : evolve_series(k, diff, v0, times)) {
    CHECK(effective_phonon(cov) < 1.0);
    CHECK(effective_phonon(cov) >= 0.0);
  }
}

TEST_CASE("logarithmic negativity closed form", "[gaussian]") {
  CHECK(logarithmic_negativity(initial_covariance(0.0)) == 0.0);

  SECTION("two-mode squeezed vacuum gives E_N = 2r") {
    for (const double r : {0.05, 0.3, 0.8, 1.5}) {
      const CovarianceMatrix tmsv = two_mode_squeezed_thermal(r, 0.0);
      CHECK(logarithmic_negativity(tmsv) == Approx(2.0 * r).epsilon(1e-9));
      CHECK(log_negativity_via_partial_transpose(tmsv) ==
            Approx(2.0 * r).epsilon(1e-9));
    }
  }

  SECTION("reference set at 9 us") {
    const DerivedParams d = testsupport::reference_derived();
    const CovarianceMatrix cov =
        evolve_covariance(drift_matrix(d), diffusion_matrix(d),
                          initial_covariance(d.n_bar), 9e-6);
    const double en = logarithmic_negativity(cov);
    CHECK(en > 2e-4);
    CHECK(en < 8e-4);
    CHECK(en == Approx(log_negativity_via_partial_transpose(cov)).margin(1e-12));
  }

  SECTION("entanglement exists in the transient window") {
    const DerivedParams d = testsupport::reference_derived();
    const DriftMatrix k = drift_matrix(d);
    const DiffusionMatrix diff = diffusion_matrix(d);
    const CovarianceMatrix v0 = initial_covariance(d.n_bar);
    bool positive_somewhere = false;
    for (const double t : {5e-8, 5e-7, 2e-6, 9e-6, 3e-5}) {
      if (logarithmic_negativity(evolve_covariance(k, diff, v0, t)) > 0.0) {
        positive_somewhere = true;
      }
    }
    CHECK(positive_somewhere);
  }
}

TEST_CASE("logarithmic negativity is invariant under local rotations",
          "[gaussian]") {
  std::mt19937_64 rng(0xda3e39cb94b95bdbull);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * constants::pi);
  const CovarianceMatrix base = two_mode_squeezed_thermal(0.4, 0.15);
  const double reference = logarithmic_negativity(base);
  CHECK(reference > 0.0);
  for (int i = 0; i < 40; ++i) {
    const CovarianceMatrix rotated =
        rotated_locally(base, angle(rng), angle(rng));
    CHECK(logarithmic_negativity(rotated) == Approx(reference).margin(1e-9));
  }
}

TEST_CASE("physicality check", "[gaussian]") {
  CHECK(physicality_check(initial_covariance(0.0)));  // vacuum saturates

  CovarianceMatrix below;
  below.v = 0.4 * Eigen::Matrix4d::Identity();
  CHECK_FALSE(physicality_check(below));

  const auto nu = symplectic_eigenvalues(initial_covariance(0.0).v);
  CHECK(nu[0] == Approx(0.5).margin(1e-12));
  CHECK(nu[1] == Approx(0.5).margin(1e-12));

  const auto nu_tms = symplectic_eigenvalues(two_mode_squeezed_thermal(0.7, 0.0).v);
  CHECK(nu_tms[0] == Approx(0.5).margin(1e-9));  // pure state
  CHECK(nu_tms[1] == Approx(0.5).margin(1e-9));
}

TEST_CASE("squeezed thermal constructor limits", "[gaussian]") {
  const CovarianceMatrix none = two_mode_squeezed_thermal(0.0, 0.0);
  CHECK((none.v - 0.5 * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() == 0.0);

  const CovarianceMatrix thermal = two_mode_squeezed_thermal(0.0, 0.8, 0.2);
  CHECK(thermal.v(0, 0) == Approx(1.3));
  CHECK(thermal.v(2, 2) == Approx(0.7));
  CHECK(thermal.cross_block().isZero(0.0));
}
