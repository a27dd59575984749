#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "phonsub/constants.hpp"
#include "phonsub/errors.hpp"

namespace phonsub {

/// Raw experimental inputs describing a driven Fabry-Perot cavity with a
/// movable end mirror. All quantities in SI units; frequencies and damping
/// rates are angular (rad/s).
struct PhysicalParams {
  double cavity_length = 0.0;      // L, meters
  double laser_wavelength = 0.0;   // lambda, meters
  double mech_freq = 0.0;          // omega_m, rad/s
  double laser_power = 0.0;        // P, watts (zero drive is allowed)
  double mirror_mass = 0.0;        // m, kilograms
  double finesse = 0.0;            // dimensionless, >= 1
  double bath_temp = 0.0;          // T, kelvin, >= 0
  double mech_damping = 0.0;       // gamma_m, rad/s
  double detuning_ratio = 0.0;     // Delta / omega_m (taken as direct input)

  // The model assumes the laser is tuned to the bare cavity resonance
  // (omega_c = omega_o); the flag records that assumption.
  bool cavity_freq_equals_laser = true;

  // Minimum mechanical quality factor omega_m / gamma_m for the Markovian
  // Brownian-noise treatment to be admissible.
  double min_quality_factor = 1e3;
};

/// Model constants computed from PhysicalParams; everything in angular SI
/// units. kappa is an angular rate throughout, including when quoted in Hz.
struct DerivedParams {
  double kappa = 0.0;         // cavity amplitude decay rate, rad/s
  double omega_c = 0.0;       // cavity resonance, rad/s
  double g0 = 0.0;            // single-photon optomechanical coupling, rad/s
  double e_mag = 0.0;         // drive amplitude |E|, rad/s
  double alpha_s = 0.0;       // steady intracavity field amplitude
  double g = 0.0;             // effective coupling G = sqrt(2) alpha_s g0, rad/s
  double n_bar = 0.0;         // thermal phonon occupancy of the bath
  double delta = 0.0;         // effective detuning Delta, rad/s

  // Carried through from the inputs; the fluctuation dynamics needs them.
  double mech_freq = 0.0;     // omega_m, rad/s
  double mech_damping = 0.0;  // gamma_m, rad/s

  // Operating-regime flags, recorded but never enforced.
  bool weak_coupling = false;      // g < kappa
  bool resolved_sideband = false;  // kappa < omega_m
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

/// Result of validate(): empty iff the parameter set is admissible.
struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
      if (&issue != &issues.front()) os << "; ";
      os << issue.field << ": " << issue.message;
    }
    return os.str();
  }
};

/// Mean thermal occupancy n_bar = 1 / (exp(hbar w / kB T) - 1).
/// Returns 0 at T = 0 by continuity.
inline double thermal_occupancy(double bath_temp, double mech_freq) {
  if (!(bath_temp >= 0.0) || !(mech_freq > 0.0)) {
    throw ParameterError("thermal_occupancy: requires bath_temp >= 0 and mech_freq > 0");
  }
  if (bath_temp == 0.0) return 0.0;
  const double x = constants::hbar * mech_freq / (constants::k_boltzmann * bath_temp);
  // expm1 keeps precision for x << 1 and overflows cleanly to +inf for
  // large x, where the occupancy underflows to 0.
  return 1.0 / std::expm1(x);
}

inline ValidationReport validate(const PhysicalParams& p) {
  ValidationReport report;
  auto flag = [&report](const char* field, const std::string& message) {
    report.issues.push_back({field, message});
  };
  auto positive = [&](const char* field, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      flag(field, "must be finite and strictly positive");
    }
  };

  positive("cavity_length", p.cavity_length);
  positive("laser_wavelength", p.laser_wavelength);
  positive("mech_freq", p.mech_freq);
  positive("mirror_mass", p.mirror_mass);
  positive("mech_damping", p.mech_damping);
  if (!(p.laser_power >= 0.0) || !std::isfinite(p.laser_power)) {
    flag("laser_power", "must be finite and non-negative");
  }
  if (!(p.finesse >= 1.0) || !std::isfinite(p.finesse)) {
    flag("finesse", "must be finite and >= 1");
  }
  if (!(p.bath_temp >= 0.0) || !std::isfinite(p.bath_temp)) {
    flag("bath_temp", "must be finite and >= 0");
  }
  if (!std::isfinite(p.detuning_ratio)) {
    flag("detuning_ratio", "must be finite");
  }
  if (p.mech_freq > 0.0 && p.mech_damping > 0.0 &&
      p.mech_freq / p.mech_damping < p.min_quality_factor) {
    std::ostringstream os;
    os << "quality factor omega_m/gamma_m = " << p.mech_freq / p.mech_damping
       << " below floor " << p.min_quality_factor
       << " required by the Markovian noise treatment";
    flag("mech_damping", os.str());
  }
  if (!p.cavity_freq_equals_laser) {
    flag("cavity_freq_equals_laser",
         "only the resonant configuration omega_c = omega_o is modeled");
  }
  return report;
}

/// Derives every model constant from the raw inputs:
///   kappa   = pi c / (F L)
///   omega_c = 2 pi c / lambda
///   g0      = (omega_c / L) sqrt(hbar / (m omega_m))
///   |E|     = sqrt(2 P kappa / (hbar omega_c))
///   Delta   = detuning_ratio * omega_m
///   alpha_s = |E| / sqrt(kappa^2 + Delta^2)
///   G       = sqrt(2) alpha_s g0
inline DerivedParams derive_params(const PhysicalParams& p) {
  const ValidationReport report = validate(p);
  if (!report.ok()) {
    throw ParameterError("derive_params: " + report.summary());
  }

  DerivedParams d;
  d.mech_freq = p.mech_freq;
  d.mech_damping = p.mech_damping;
  d.kappa = constants::pi * constants::speed_of_light / (p.finesse * p.cavity_length);
  d.omega_c = 2.0 * constants::pi * constants::speed_of_light / p.laser_wavelength;
  d.g0 = (d.omega_c / p.cavity_length) *
         std::sqrt(constants::hbar / (p.mirror_mass * p.mech_freq));
  d.e_mag = std::sqrt(2.0 * p.laser_power * d.kappa / (constants::hbar * d.omega_c));
  d.delta = p.detuning_ratio * p.mech_freq;
  d.alpha_s = d.e_mag / std::sqrt(d.kappa * d.kappa + d.delta * d.delta);
  d.g = std::sqrt(2.0) * d.alpha_s * d.g0;
  d.n_bar = thermal_occupancy(p.bath_temp, p.mech_freq);
  d.weak_coupling = d.g < d.kappa;
  d.resolved_sideband = d.kappa < p.mech_freq;

  const struct {
    const char* name;
    double value;
  } checks[] = {{"kappa", d.kappa},     {"omega_c", d.omega_c}, {"g0", d.g0},
                {"e_mag", d.e_mag},     {"alpha_s", d.alpha_s}, {"g", d.g},
                {"n_bar", d.n_bar},     {"delta", d.delta}};
  for (const auto& check : checks) {
    if (!std::isfinite(check.value)) {
      throw ParameterError(std::string("derive_params: derived quantity '") +
                           check.name + "' is not finite");
    }
  }
  return d;
}

}  // namespace phonsub
