#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "phonsub/dynamics.hpp"
#include "phonsub/fock_oracle.hpp"
#include "phonsub/gaussian.hpp"
#include "phonsub/params.hpp"
#include "phonsub/quadrature.hpp"
#include "phonsub/subtraction.hpp"

namespace phonsub {

/// Wigner function of the number state |n>,
///   W_n(delta) = (2/pi) (-1)^n exp(-2 |delta|^2) L_n(4 |delta|^2).
/// For n = 1 this is the single-quantum reference
///   (2/pi) exp(-2 |delta|^2) (4 |delta|^2 - 1).
inline double fock_wigner(int n, std::complex<double> delta) {
  if (n < 0) throw ParameterError("fock_wigner: n must be >= 0");
  const double r2 = std::norm(delta);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return (2.0 / constants::pi) * sign * std::exp(-2.0 * r2) *
         fock_detail::generalized_laguerre(n, 0, 4.0 * r2);
}

namespace analysis_detail {

inline double binomial(int n, int k) {
  double acc = 1.0;
  for (int i = 1; i <= k; ++i) acc *= double(n - k + i) / double(i);
  return acc;
}

/// W_n as polynomial * Gaussian for the moment route.
inline GaussianPolyForm fock_wigner_form(int n) {
  GaussianPolyForm form;
  form.a = 4.0 * Eigen::Matrix2d::Identity();  // exp(-2 |delta|^2)
  BivariatePoly poly(2 * n, 2 * n);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  // L_n(x) = sum_k (-1)^k C(n, k) x^k / k!, with x = 4 (dr^2 + di^2).
  double four_pow = 1.0, factorial = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      four_pow *= 4.0;
      factorial *= k;
    }
    const double coeff = (k % 2 == 0 ? 1.0 : -1.0) * binomial(n, k) *
                         four_pow / factorial;
    for (int j = 0; j <= k; ++j) {
      poly.at(2 * j, 2 * (k - j)) += coeff * binomial(k, j);
    }
  }
  form.poly = poly.scaled(sign * 2.0 / constants::pi);
  return form;
}

/// pi * integral of W * W_n computed along two independent routes: the
/// Isserlis moment closed form of the polynomial product, and aligned
/// Gauss-Hermite quadrature of the raw integrand. Returns the moment value;
/// disagreement beyond tolerance is a numerical-integrity error.
template <class RawWigner>
double dual_fock_overlap(const GaussianPolyForm& w_form, RawWigner&& w_raw,
                         int n, double tol = 1e-9) {
  const GaussianPolyForm reference = fock_wigner_form(n);
  GaussianPolyForm product = w_form * reference;
  product.poly = product.poly.scaled(constants::pi);
  const double via_moments = integrate_moments(product);
  const auto raw = [&](double x, double y) {
    return constants::pi * w_raw(x, y) *
           fock_wigner(n, std::complex<double>(x, y));
  };
  const double via_quadrature = integrate_raw_quadrature(product.a, raw, 40);
  if (std::abs(via_moments - via_quadrature) >
      tol * std::max(1.0, std::abs(via_moments))) {
    std::ostringstream os;
    os << "overlap integral: moment closed form " << via_moments
       << " and quadrature " << via_quadrature << " disagree beyond " << tol;
    throw NumericalIntegrityError(os.str());
  }
  return via_moments;
}

/// Normalization integral of W, same dual-route scheme.
template <class RawWigner>
double dual_normalization(const GaussianPolyForm& w_form, RawWigner&& w_raw,
                          double tol = 1e-9) {
  const double via_moments = integrate_moments(w_form);
  const double via_quadrature = integrate_raw_quadrature(
      w_form.a, [&](double x, double y) { return w_raw(x, y); }, 40);
  if (std::abs(via_moments - via_quadrature) >
      tol * std::max(1.0, std::abs(via_moments))) {
    throw NumericalIntegrityError(
        "normalization integral: moment and quadrature routes disagree");
  }
  return via_moments;
}

}  // namespace analysis_detail

/// Overlap fidelity with the single-phonon state, F = pi Int W W_1 d^2delta.
inline double fidelity_single_phonon(const ConditionalWignerEvaluator& w) {
  return analysis_detail::dual_fock_overlap(
      w.gaussian_form(), [&w](double x, double y) { return w(x, y); }, 1);
}

/// Phonon number distribution P(n) = pi Int W W_n for n = 0..n_max.
/// Negative round-off values are clamped to zero and reported.
struct PhononDistribution {
  std::vector<double> probabilities;
  std::vector<int> clamped;  // indices whose raw value was negative

  int mode() const {
    int best = 0;
    for (std::size_t n = 1; n < probabilities.size(); ++n) {
      if (probabilities[n] > probabilities[best]) best = int(n);
    }
    return best;
  }

  double total() const {
    double acc = 0.0;
    for (double p : probabilities) acc += p;
    return acc;
  }
};

inline PhononDistribution phonon_distribution(const ConditionalWignerEvaluator& w,
                                              int n_max) {
  if (n_max < 1) throw ParameterError("phonon_distribution: n_max must be >= 1");
  PhononDistribution dist;
  dist.probabilities.resize(n_max + 1);
  const GaussianPolyForm form = w.gaussian_form();
  const auto raw = [&w](double x, double y) { return w(x, y); };
  for (int n = 0; n <= n_max; ++n) {
    double p = analysis_detail::dual_fock_overlap(form, raw, n);
    if (p < 0.0) {
      if (p < -1e-8) {
        std::ostringstream os;
        os << "phonon_distribution: P(" << n << ") = " << p
           << " below the round-off floor";
        throw NumericalIntegrityError(os.str());
      }
      dist.clamped.push_back(n);
      p = 0.0;
    }
    dist.probabilities[n] = p;
  }
  return dist;
}

/// Uniformly sampled Wigner function over [-extent, extent]^2, row-major
/// with the second phase-space coordinate as the slow index.
struct WignerGrid {
  double extent = 0.0;
  int resolution = 0;
  std::vector<double> values;  // values[iy * resolution + ix]
  double min_value = 0.0;
  double min_delta_r = 0.0;
  double min_delta_i = 0.0;
  double riemann_mass = 0.0;  // sum * cell area

  double step() const { return 2.0 * extent / (resolution - 1); }
  double coordinate(int index) const { return -extent + step() * index; }
};

template <class WignerFn>
WignerGrid wigner_grid(WignerFn&& w, double extent, int resolution) {
  if (!(extent > 0.0) || resolution < 2) {
    throw ParameterError("wigner_grid: requires extent > 0 and resolution >= 2");
  }
  WignerGrid grid;
  grid.extent = extent;
  grid.resolution = resolution;
  grid.values.resize(std::size_t(resolution) * resolution);
  const double step = grid.step();
  double sum = 0.0;
  for (int iy = 0; iy < resolution; ++iy) {
    const double di = -extent + step * iy;
    for (int ix = 0; ix < resolution; ++ix) {
      const double dr = -extent + step * ix;
      const double value = w(dr, di);
      grid.values[std::size_t(iy) * resolution + ix] = value;
      sum += value;
      if (value < grid.min_value) {
        grid.min_value = value;
        grid.min_delta_r = dr;
        grid.min_delta_i = di;
      }
    }
  }
  grid.riemann_mass = sum * step * step;
  return grid;
}

enum class PointErrorKind {
  none,
  zero_heralding,
  unphysical,
  numerical_integrity,
  other,
};

/// One point of a measurement-time sweep. A nonempty error string marks a
/// point whose pipeline failed; the numeric fields are then unset.
struct SweepPoint {
  double time = 0.0;  // seconds
  double fidelity = 0.0;
  double n_eff = 0.0;
  double log_negativity = 0.0;
  double heralding = 0.0;
  std::string error;
  PointErrorKind error_kind = PointErrorKind::none;

  bool ok() const { return error.empty(); }
};

struct FidelityCurve {
  std::vector<SweepPoint> points;
};

namespace analysis_detail {

inline PointErrorKind classify(const Error& e) {
  if (dynamic_cast<const ZeroHeraldingError*>(&e)) {
    return PointErrorKind::zero_heralding;
  }
  if (dynamic_cast<const UnphysicalStateError*>(&e)) {
    return PointErrorKind::unphysical;
  }
  if (dynamic_cast<const NumericalIntegrityError*>(&e)) {
    return PointErrorKind::numerical_integrity;
  }
  return PointErrorKind::other;
}

inline SweepPoint conditioned_point(const CovarianceMatrix& cov) {
  SweepPoint point;
  point.time = cov.time;
  try {
    point.n_eff = effective_phonon(cov);
    point.log_negativity = logarithmic_negativity(cov);
    const ConventionedCovariance sigma = conditioning_convention(cov);
    point.heralding = heralding_weight(sigma);
    const ConditionalWignerEvaluator w(sigma);
    point.fidelity = fidelity_single_phonon(w);
  } catch (const Error& e) {
    std::ostringstream os;
    os << e.what() << " (t = " << cov.time << " s)";
    point.error = os.str();
    point.error_kind = classify(e);
  }
  return point;
}

}  // namespace analysis_detail

/// Full pipeline per time point: derive -> evolve -> condition -> fidelity.
/// Per-point failures are recorded on the affected point with its time.
inline FidelityCurve fidelity_time_sweep(const PhysicalParams& p,
                                         std::span<const double> times) {
  const DerivedParams d = derive_params(p);
  const StabilityReport stability = stability_check(d);
  if (!stability.stable) {
    throw InstabilityError(
        "fidelity_time_sweep: parameters violate the stability constraints");
  }
  const DriftMatrix k = drift_matrix(d);
  const DiffusionMatrix diffusion = diffusion_matrix(d);
  const CovarianceMatrix v0 = initial_covariance(d.n_bar);
  const auto series = evolve_series(k, diffusion, v0, times);
  FidelityCurve curve;
  curve.points.reserve(series.size());
  for (const auto& cov : series) {
    curve.points.push_back(analysis_detail::conditioned_point(cov));
  }
  return curve;
}

/// One record of the temperature study grid.
struct SweepRecord {
  double temperature = 0.0;  // kelvin
  SweepPoint point;
  std::vector<double> phonon;  // P(0..n_max), empty on per-point failure
};

struct SweepResult {
  std::vector<SweepRecord> records;  // temperature-major, time-minor order
};

/// Grid of {F, P(n), n_eff, E_N} records over bath temperatures and
/// measurement times. Record order follows the input order.
inline SweepResult temperature_sweep(const PhysicalParams& p,
                                     std::span<const double> temps,
                                     std::span<const double> times,
                                     int n_max = 10) {
  SweepResult result;
  result.records.reserve(temps.size() * times.size());
  for (const double temperature : temps) {
    PhysicalParams pt = p;
    pt.bath_temp = temperature;
    const DerivedParams d = derive_params(pt);
    const StabilityReport stability = stability_check(d);
    if (!stability.stable) {
      throw InstabilityError(
          "temperature_sweep: parameters violate the stability constraints");
    }
    const auto series = evolve_series(drift_matrix(d), diffusion_matrix(d),
                                      initial_covariance(d.n_bar), times);
    for (const auto& cov : series) {
      SweepRecord record;
      record.temperature = temperature;
      record.point = analysis_detail::conditioned_point(cov);
      if (record.point.ok()) {
        try {
          const ConditionalWignerEvaluator w(conditioning_convention(cov));
          record.phonon = phonon_distribution(w, n_max).probabilities;
        } catch (const Error& e) {
          record.point.error = e.what();
          record.point.error_kind = analysis_detail::classify(e);
        }
      }
      result.records.push_back(std::move(record));
    }
  }
  return result;
}

}  // namespace phonsub
