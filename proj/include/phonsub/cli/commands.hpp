#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phonsub/analysis.hpp"
#include "phonsub/cli/config.hpp"
#include "phonsub/cli/emit.hpp"
#include "phonsub/phonsub.hpp"

namespace phonsub::cli {

// Exit codes, also documented in the README.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;       // config / usage errors
inline constexpr int kExitStability = 3;    // parameter validation, instability
inline constexpr int kExitHeralding = 4;    // zero-heralding
inline constexpr int kExitNumerical = 5;    // numerical-integrity failures
inline constexpr int kExitInternal = 6;

struct OutputOptions {
  std::filesystem::path out_dir = ".";
  bool want_json = true;
  bool want_svg = false;
  std::optional<int> ideal_fock;
};

namespace command_detail {

inline OutputOptions resolve_outputs(const RunConfig& config,
                                     const std::optional<std::string>& out_flag,
                                     const std::optional<std::string>& formats_flag,
                                     std::optional<int> ideal_fock) {
  OutputOptions options;
  if (config.scenario.out_dir) options.out_dir = *config.scenario.out_dir;
  if (out_flag) options.out_dir = *out_flag;
  std::string formats = "csv,json";
  if (config.scenario.formats) formats = *config.scenario.formats;
  if (formats_flag) formats = *formats_flag;

  options.want_json = false;
  options.want_svg = false;
  std::stringstream stream(formats);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const std::string f = config_detail::trim(token);
    if (f == "csv") {
      // CSV is the authoritative output and always written where defined.
    } else if (f == "json") {
      options.want_json = true;
    } else if (f == "svg") {
      options.want_svg = true;
    } else if (!f.empty()) {
      throw ConfigError("unknown output format '" + f + "'");
    }
  }
  options.ideal_fock = ideal_fock;
  return options;
}

inline void require_command_match(const RunConfig& config, const std::string& name) {
  if (config.scenario.command && *config.scenario.command != name) {
    throw ConfigError("config names scenario command '" +
                      *config.scenario.command + "' but '" + name +
                      "' was invoked");
  }
}

inline double to_us(double seconds) { return seconds * 1e6; }
inline double to_mk(double kelvin) { return kelvin * 1e3; }

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const ParameterError*>(&e)) return kExitStability;
  if (dynamic_cast<const InstabilityError*>(&e)) return kExitStability;
  if (dynamic_cast<const ZeroHeraldingError*>(&e)) return kExitHeralding;
  if (dynamic_cast<const NumericalIntegrityError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const UnphysicalStateError*>(&e)) return kExitNumerical;
  return kExitInternal;
}

inline int exit_code_for(PointErrorKind kind) {
  switch (kind) {
    case PointErrorKind::zero_heralding: return kExitHeralding;
    case PointErrorKind::unphysical: return kExitNumerical;
    case PointErrorKind::numerical_integrity: return kExitNumerical;
    default: return kExitInternal;
  }
}

inline DerivedParams derive_checked(const PhysicalParams& p) {
  const ValidationReport report = validate(p);
  if (!report.ok()) {
    throw ParameterError("invalid parameters: " + report.summary());
  }
  return derive_params(p);
}

inline void require_stable(const DerivedParams& d) {
  const StabilityReport report = stability_check(d);
  if (!report.stable) {
    throw InstabilityError("parameter set violates the stability constraints");
  }
}

}  // namespace command_detail

// ---------------------------------------------------------------------------
// derive

inline std::vector<EmittedArtifact> cmd_derive(const RunConfig& config,
                                               const OutputOptions& options) {
  command_detail::require_command_match(config, "derive");
  const DerivedParams d = command_detail::derive_checked(config.params);
  const StabilityReport stability = stability_check(d);

  nlohmann::ordered_json j;
  j["derived_params"] = {
      {"kappa", d.kappa},       {"omega_c", d.omega_c},
      {"g0", d.g0},             {"e_mag", d.e_mag},
      {"alpha_s", d.alpha_s},   {"g", d.g},
      {"n_bar", d.n_bar},       {"delta", d.delta},
      {"mech_freq", d.mech_freq}, {"mech_damping", d.mech_damping},
  };
  j["flags"] = {{"weak_coupling", d.weak_coupling},
                {"resolved_sideband", d.resolved_sideband}};
  j["stability"] = {{"c1", stability.c1},
                    {"c2", stability.c2},
                    {"stable", stability.stable}};
  return {write_artifact(options.out_dir / "derive.json", "json",
                         j.dump(2) + "\n")};
}

// ---------------------------------------------------------------------------
// fidelity-sweep

inline std::vector<EmittedArtifact> cmd_fidelity_sweep(
    const RunConfig& config, const OutputOptions& options) {
  command_detail::require_command_match(config, "fidelity-sweep");
  if (config.scenario.times_s.empty()) {
    throw ConfigError("fidelity-sweep requires a nonempty scenario times_us");
  }
  const FidelityCurve curve =
      fidelity_time_sweep(config.params, config.scenario.times_s);

  std::vector<std::vector<std::string>> rows;
  std::vector<double> plot_t, plot_f;
  bool any_ok = false;
  PointErrorKind first_error = PointErrorKind::none;
  for (const SweepPoint& point : curve.points) {
    if (point.ok()) {
      any_ok = true;
      rows.push_back({format_double(command_detail::to_us(point.time)),
                      format_double(point.fidelity), format_double(point.n_eff),
                      format_double(point.log_negativity),
                      format_double(point.heralding), ""});
      plot_t.push_back(command_detail::to_us(point.time));
      plot_f.push_back(point.fidelity);
    } else {
      if (first_error == PointErrorKind::none) first_error = point.error_kind;
      rows.push_back({format_double(command_detail::to_us(point.time)), "", "",
                      "", "", point.error});
    }
  }
  std::vector<EmittedArtifact> artifacts;
  artifacts.push_back(write_artifact(
      options.out_dir / "fidelity_sweep.csv", "csv",
      render_csv("t_us,fidelity,n_eff,log_negativity,heralding_weight,error",
                 rows)));
  if (options.want_svg && !plot_t.empty()) {
    artifacts.push_back(write_artifact(
        options.out_dir / "fidelity_sweep.svg", "svg",
        render_svg_line_plot("t (us)", "fidelity", plot_t, plot_f)));
  }
  if (!any_ok) {
    const std::string message =
        "fidelity-sweep: every time point failed; see the error column of "
        "fidelity_sweep.csv";
    switch (first_error) {
      case PointErrorKind::zero_heralding: throw ZeroHeraldingError(message);
      case PointErrorKind::unphysical: throw UnphysicalStateError(message);
      case PointErrorKind::numerical_integrity:
        throw NumericalIntegrityError(message);
      default: throw Error(message);
    }
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// wigner

inline std::vector<EmittedArtifact> cmd_wigner(const RunConfig& config,
                                               const OutputOptions& options) {
  command_detail::require_command_match(config, "wigner");
  const double extent = config.scenario.grid_extent;
  const int resolution = config.scenario.grid_resolution;

  WignerGrid grid;
  double closed_form_mass = 0.0;
  if (options.ideal_fock) {
    const int n = *options.ideal_fock;
    grid = wigner_grid(
        [n](double dr, double di) {
          return fock_wigner(n, std::complex<double>(dr, di));
        },
        extent, resolution);
    closed_form_mass = integrate_moments(analysis_detail::fock_wigner_form(n));
  } else {
    if (!config.scenario.time_s) {
      throw ConfigError("wigner requires scenario time_us (or --ideal-fock)");
    }
    const DerivedParams d = command_detail::derive_checked(config.params);
    command_detail::require_stable(d);
    const CovarianceMatrix cov =
        evolve_covariance(drift_matrix(d), diffusion_matrix(d),
                          initial_covariance(d.n_bar), *config.scenario.time_s);
    const ConditionalWignerEvaluator w(conditioning_convention(cov));
    grid = wigner_grid([&w](double dr, double di) { return w(dr, di); }, extent,
                       resolution);
    closed_form_mass = analysis_detail::dual_normalization(
        w.gaussian_form(), [&w](double x, double y) { return w(x, y); });
  }

  std::vector<std::vector<std::string>> rows;
  rows.reserve(grid.values.size());
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      rows.push_back({format_double(grid.coordinate(ix)),
                      format_double(grid.coordinate(iy)),
                      format_double(grid.values[std::size_t(iy) * resolution + ix])});
    }
  }
  std::vector<EmittedArtifact> artifacts;
  artifacts.push_back(write_artifact(options.out_dir / "wigner_grid.csv", "csv",
                                     render_csv("delta_r,delta_i,wigner", rows)));
  if (options.want_json) {
    nlohmann::ordered_json j;
    j["min_value"] = grid.min_value;
    j["min_location"] = {{"delta_r", grid.min_delta_r},
                         {"delta_i", grid.min_delta_i}};
    j["normalization_residual"] = closed_form_mass - 1.0;
    j["riemann_mass"] = grid.riemann_mass;
    j["extent"] = grid.extent;
    j["resolution"] = grid.resolution;
    artifacts.push_back(write_artifact(options.out_dir / "wigner_summary.json",
                                       "json", j.dump(2) + "\n"));
  }
  if (options.want_svg) {
    artifacts.push_back(write_artifact(
        options.out_dir / "wigner.svg", "svg",
        render_svg_heatmap("delta_r", "delta_i", resolution, resolution,
                           grid.values, -extent, extent, -extent, extent)));
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// phonon-stats

inline std::vector<EmittedArtifact> cmd_phonon_stats(
    const RunConfig& config, const OutputOptions& options) {
  command_detail::require_command_match(config, "phonon-stats");
  const int n_max = config.scenario.n_max;
  if (n_max < 1) throw ConfigError("phonon-stats requires n_max >= 1");

  std::vector<double> probabilities;
  if (options.ideal_fock) {
    const int n = *options.ideal_fock;
    const GaussianPolyForm form = analysis_detail::fock_wigner_form(n);
    const auto raw = [n](double x, double y) {
      return fock_wigner(n, std::complex<double>(x, y));
    };
    for (int k = 0; k <= n_max; ++k) {
      const double p = analysis_detail::dual_fock_overlap(form, raw, k);
      probabilities.push_back(std::max(p, 0.0));
    }
  } else {
    if (!config.scenario.time_s) {
      throw ConfigError("phonon-stats requires scenario time_us (or --ideal-fock)");
    }
    const DerivedParams d = command_detail::derive_checked(config.params);
    command_detail::require_stable(d);
    const CovarianceMatrix cov =
        evolve_covariance(drift_matrix(d), diffusion_matrix(d),
                          initial_covariance(d.n_bar), *config.scenario.time_s);
    const ConditionalWignerEvaluator w(conditioning_convention(cov));
    probabilities = phonon_distribution(w, n_max).probabilities;
  }

  std::vector<std::vector<std::string>> rows;
  for (std::size_t n = 0; n < probabilities.size(); ++n) {
    rows.push_back({std::to_string(n), format_double(probabilities[n])});
  }
  std::vector<EmittedArtifact> artifacts;
  artifacts.push_back(write_artifact(options.out_dir / "phonon_stats.csv",
                                     "csv", render_csv("n,probability", rows)));
  if (options.want_svg) {
    artifacts.push_back(write_artifact(
        options.out_dir / "phonon_stats.svg", "svg",
        render_svg_bar_chart("n", "P(n)", probabilities)));
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// temp-sweep

inline std::vector<EmittedArtifact> cmd_temp_sweep(const RunConfig& config,
                                                   const OutputOptions& options) {
  command_detail::require_command_match(config, "temp-sweep");
  if (config.scenario.temps_k.empty() || config.scenario.times_s.empty()) {
    throw ConfigError("temp-sweep requires nonempty temps_mk and times_us");
  }
  const SweepResult result =
      temperature_sweep(config.params, config.scenario.temps_k,
                        config.scenario.times_s, config.scenario.n_max);

  std::vector<std::vector<std::string>> rows;
  std::vector<double> heat;  // fidelity grid, temperature-major
  for (const SweepRecord& record : result.records) {
    const SweepPoint& point = record.point;
    if (point.ok()) {
      rows.push_back({format_double(command_detail::to_mk(record.temperature)),
                      format_double(command_detail::to_us(point.time)),
                      format_double(point.fidelity), format_double(point.n_eff),
                      format_double(point.log_negativity), ""});
      heat.push_back(point.fidelity);
    } else {
      rows.push_back({format_double(command_detail::to_mk(record.temperature)),
                      format_double(command_detail::to_us(point.time)), "", "",
                      "", point.error});
      heat.push_back(0.0);
    }
  }
  std::vector<EmittedArtifact> artifacts;
  artifacts.push_back(write_artifact(
      options.out_dir / "temp_sweep.csv", "csv",
      render_csv("T_mK,t_us,fidelity,n_eff,log_negativity,error", rows)));
  if (options.want_svg) {
    const int columns = int(config.scenario.times_s.size());
    const int grid_rows = int(config.scenario.temps_k.size());
    artifacts.push_back(write_artifact(
        options.out_dir / "temp_sweep.svg", "svg",
        render_svg_heatmap(
            "t (us)", "T (mK)", columns, grid_rows, heat,
            command_detail::to_us(config.scenario.times_s.front()),
            command_detail::to_us(config.scenario.times_s.back()),
            command_detail::to_mk(config.scenario.temps_k.front()),
            command_detail::to_mk(config.scenario.temps_k.back()), 0.999)));
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// entanglement

inline std::vector<EmittedArtifact> cmd_entanglement(
    const RunConfig& config, const OutputOptions& options) {
  command_detail::require_command_match(config, "entanglement");
  if (config.scenario.times_s.empty()) {
    throw ConfigError("entanglement requires a nonempty scenario times_us");
  }
  const DerivedParams d = command_detail::derive_checked(config.params);
  command_detail::require_stable(d);
  const auto series =
      evolve_series(drift_matrix(d), diffusion_matrix(d),
                    initial_covariance(d.n_bar), config.scenario.times_s);

  std::vector<std::vector<std::string>> rows;
  std::vector<double> plot_t, plot_en;
  for (const CovarianceMatrix& cov : series) {
    const double en = logarithmic_negativity(cov);
    // Soft diagnostic only: the blue-detuned two-mode-squeezing picture
    // bounds E_N by ln 2.
    if (en > std::log(2.0)) {
      std::cerr << "warning: E_N = " << en << " at t = " << cov.time
                << " s exceeds ln 2\n";
    }
    rows.push_back({format_double(command_detail::to_us(cov.time)),
                    format_double(en), format_double(effective_phonon(cov))});
    plot_t.push_back(command_detail::to_us(cov.time));
    plot_en.push_back(en);
  }
  std::vector<EmittedArtifact> artifacts;
  artifacts.push_back(
      write_artifact(options.out_dir / "entanglement.csv", "csv",
                     render_csv("t_us,log_negativity,n_eff", rows)));
  if (options.want_svg) {
    artifacts.push_back(write_artifact(
        options.out_dir / "entanglement.svg", "svg",
        render_svg_line_plot("t (us)", "log negativity", plot_t, plot_en)));
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Conditional single-phonon state preparation in a linearized "
               "optomechanical cavity via photon subtraction"};
  app.require_subcommand(1);

  struct SharedOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> formats;
    std::optional<int> ideal_fock;
  };
  SharedOptions shared;

  const std::vector<std::string> names = {"derive",       "fidelity-sweep",
                                          "wigner",       "phonon-stats",
                                          "temp-sweep",   "entanglement"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", shared.config_path, "run configuration file")
        ->required();
    sub->add_option_function<std::string>(
        "--out", [&shared](const std::string& v) { shared.out_dir = v; },
        "output directory");
    sub->add_option_function<std::string>(
        "--formats", [&shared](const std::string& v) { shared.formats = v; },
        "comma list of csv,json,svg");
    if (name == "wigner" || name == "phonon-stats") {
      sub->add_option_function<int>(
          "--ideal-fock",
          [&shared](int n) { shared.ideal_fock = n; },
          "emit the ideal Fock-state reference |n> instead of the "
          "conditioned state");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = load_config(shared.config_path);
    const OutputOptions options = command_detail::resolve_outputs(
        config, shared.out_dir, shared.formats, shared.ideal_fock);
    if (options.ideal_fock && *options.ideal_fock < 0) {
      throw ConfigError("--ideal-fock requires n >= 0");
    }

    std::vector<EmittedArtifact> artifacts;
    if (command == "derive") {
      artifacts = cmd_derive(config, options);
    } else if (command == "fidelity-sweep") {
      artifacts = cmd_fidelity_sweep(config, options);
    } else if (command == "wigner") {
      artifacts = cmd_wigner(config, options);
    } else if (command == "phonon-stats") {
      artifacts = cmd_phonon_stats(config, options);
    } else if (command == "temp-sweep") {
      artifacts = cmd_temp_sweep(config, options);
    } else {
      artifacts = cmd_entanglement(config, options);
    }
    for (const EmittedArtifact& artifact : artifacts) {
      out << "wrote " << artifact.path << " kind=" << artifact.kind
          << " checksum=" << artifact.checksum << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return command_detail::exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace phonsub::cli
