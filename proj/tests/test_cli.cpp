#include <catch2/catch.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phonsub/cli/commands.hpp"
#include "test_support.hpp"

using namespace phonsub;
namespace fs = std::filesystem;

namespace {

const char* kReferenceParams =
    "[parameters]\n"
    "cavity_length_mm = 1.0\n"
    "laser_wavelength_nm = 1064.0\n"
    "mech_freq_ghz = 1.0\n"
    "laser_power_mw = 5.0\n"
    "mirror_mass_ng = 5.0\n"
    "finesse = 10000\n"
    "bath_temp_mk = 1.0\n"
    "mech_damping_hz = 100.0\n"
    "detuning_ratio = -1.0\n";

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("phonsub_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name,
                    const std::string& content) {
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run_cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  std::vector<const char*> argv = {"phonsub"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  if (stdout_text) *stdout_text = out.str();
  INFO(err.str());
  return code;
}

}  // namespace

TEST_CASE("config parsing", "[cli]") {
  SECTION("units convert at the boundary") {
    const cli::RunConfig config = cli::parse_config_text(kReferenceParams);
    const PhysicalParams expected = testsupport::reference_params();
    CHECK(config.params.cavity_length == Approx(expected.cavity_length));
    CHECK(config.params.laser_wavelength == Approx(expected.laser_wavelength));
    CHECK(config.params.mech_freq == Approx(expected.mech_freq));
    CHECK(config.params.laser_power == Approx(expected.laser_power));
    CHECK(config.params.mirror_mass == Approx(expected.mirror_mass));
    CHECK(config.params.bath_temp == Approx(expected.bath_temp));
    CHECK(config.params.mech_damping == Approx(expected.mech_damping));
    CHECK(config.params.detuning_ratio == -1.0);
  }

  SECTION("scenario lists carry unit suffixes too") {
    const std::string text = std::string(kReferenceParams) +
                             "[scenario]\ntimes_us = 1.0, 2.5\ntemps_mk = 1, 50\n"
                             "time_us = 9\nn_max = 6\n";
    const cli::RunConfig config = cli::parse_config_text(text);
    REQUIRE(config.scenario.times_s.size() == 2);
    CHECK(config.scenario.times_s[0] == Approx(1e-6));
    CHECK(config.scenario.times_s[1] == Approx(2.5e-6));
    REQUIRE(config.scenario.temps_k.size() == 2);
    CHECK(config.scenario.temps_k[1] == Approx(0.05));
    CHECK(config.scenario.time_s.value() == Approx(9e-6));
    CHECK(config.scenario.n_max == 6);
  }

  SECTION("unknown keys are rejected") {
    CHECK_THROWS_AS(
        cli::parse_config_text(std::string(kReferenceParams) + "bogus_key = 1\n"),
        ConfigError);
    CHECK_THROWS_AS(
        cli::parse_config_text(std::string(kReferenceParams) +
                               "[scenario]\nmystery = 2\n"),
        ConfigError);
  }

  SECTION("missing required keys are rejected") {
    CHECK_THROWS_AS(cli::parse_config_text("[parameters]\nfinesse = 10\n"),
                    ConfigError);
  }

  SECTION("duplicate keys are rejected") {
    CHECK_THROWS_AS(
        cli::parse_config_text(std::string(kReferenceParams) + "finesse = 2\n"),
        ConfigError);
  }
}

TEST_CASE("derive command", "[cli]") {
  TempDir dir("derive");
  const fs::path config = write_file(dir.path, "run.cfg", kReferenceParams);

  SECTION("reference parameters") {
    REQUIRE(run_cli({"derive", "--config", config.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto j = nlohmann::json::parse(read_file(dir.path / "derive.json"));
    CHECK(j["derived_params"]["g"].get<double>() == Approx(51847.0).epsilon(5e-3));
    CHECK(j["derived_params"]["kappa"].get<double>() == Approx(9.42e7).epsilon(1e-3));
    CHECK(j["stability"]["stable"].get<bool>());
    CHECK(j["flags"]["weak_coupling"].get<bool>());
  }

  SECTION("zero drive") {
    const fs::path cfg = write_file(
        dir.path, "p0.cfg",
        std::string(kReferenceParams).replace(
            std::string(kReferenceParams).find("laser_power_mw = 5.0"),
            std::string("laser_power_mw = 5.0").size(), "laser_power_mw = 0.0"));
    REQUIRE(run_cli({"derive", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto j = nlohmann::json::parse(read_file(dir.path / "derive.json"));
    CHECK(j["derived_params"]["g"].get<double>() == 0.0);
    CHECK(j["stability"]["stable"].get<bool>());
  }

  SECTION("sub-unit finesse fails validation") {
    std::string text = kReferenceParams;
    const auto pos = text.find("finesse = 10000");
    text.replace(pos, std::string("finesse = 10000").size(), "finesse = 0.5");
    const fs::path cfg = write_file(dir.path, "bad.cfg", text);
    CHECK(run_cli({"derive", "--config", cfg.string(), "--out",
                   dir.path.string()}) == cli::kExitStability);
  }
}

TEST_CASE("fidelity sweep command", "[cli]") {
  TempDir dir("fsweep");

  SECTION("reference table times") {
    const fs::path cfg = write_file(
        dir.path, "run.cfg",
        std::string(kReferenceParams) +
            "[scenario]\ntimes_us = 1.0001, 5.0001, 10.0001, 15.0001, 20.0001,"
            " 25.0001, 30.0001, 35.0001, 40.0001, 45.0001\n");
    REQUIRE(run_cli({"fidelity-sweep", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "fidelity_sweep.csv").string());
    REQUIRE(rows.size() == 11);  // header + 10 points
    CHECK(rows[0][0] == "t_us");
    CHECK(std::stod(rows[1][1]) == Approx(0.999968).margin(1e-3));
    CHECK(std::stod(rows[10][1]) == Approx(0.998731).margin(1e-3));
  }

  SECTION("single point at 9 us") {
    const fs::path cfg = write_file(dir.path, "single.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\ntimes_us = 9.0\n");
    REQUIRE(run_cli({"fidelity-sweep", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "fidelity_sweep.csv").string());
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][1]) == Approx(0.99974).margin(1e-3));
  }

  SECTION("empty times is a usage error") {
    const fs::path cfg = write_file(dir.path, "empty.cfg", kReferenceParams);
    CHECK(run_cli({"fidelity-sweep", "--config", cfg.string(), "--out",
                   dir.path.string()}) == cli::kExitConfig);
  }

  SECTION("t = 0 is recorded as a zero-heralding row") {
    const fs::path cfg = write_file(dir.path, "zero.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\ntimes_us = 0, 9.0\n");
    REQUIRE(run_cli({"fidelity-sweep", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "fidelity_sweep.csv").string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][5].find("vanishing probability") != std::string::npos);
    CHECK(rows[2][5].empty());
  }
}

TEST_CASE("wigner command", "[cli]") {
  TempDir dir("wigner");

  SECTION("conditioned state at 9 us") {
    const fs::path cfg = write_file(
        dir.path, "run.cfg",
        std::string(kReferenceParams) +
            "[scenario]\ntime_us = 9.0\ngrid_extent = 3.0\ngrid_resolution = 41\n");
    REQUIRE(run_cli({"wigner", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto j = nlohmann::json::parse(read_file(dir.path / "wigner_summary.json"));
    CHECK(j["min_value"].get<double>() < 0.0);
    CHECK(j["min_location"]["delta_r"].get<double>() == Approx(0.0).margin(1e-12));
    CHECK(j["min_location"]["delta_i"].get<double>() == Approx(0.0).margin(1e-12));
    CHECK(std::abs(j["normalization_residual"].get<double>()) < 1e-6);
    const auto rows = cli::read_csv_file((dir.path / "wigner_grid.csv").string());
    CHECK(rows.size() == std::size_t(1 + 41 * 41));
    CHECK(rows[0][2] == "wigner");
  }

  SECTION("ideal Fock reference") {
    const fs::path cfg = write_file(
        dir.path, "ideal.cfg",
        std::string(kReferenceParams) +
            "[scenario]\ngrid_extent = 3.0\ngrid_resolution = 41\n");
    REQUIRE(run_cli({"wigner", "--config", cfg.string(), "--out",
                     dir.path.string(), "--ideal-fock", "1"}) == cli::kExitOk);
    const auto j = nlohmann::json::parse(read_file(dir.path / "wigner_summary.json"));
    CHECK(j["min_value"].get<double>() ==
          Approx(-2.0 / constants::pi).epsilon(1e-12));
  }

  SECTION("t = 0 reports zero heralding") {
    const fs::path cfg = write_file(dir.path, "zero.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\ntime_us = 0.0\n");
    CHECK(run_cli({"wigner", "--config", cfg.string(), "--out",
                   dir.path.string()}) == cli::kExitHeralding);
  }
}

TEST_CASE("phonon stats command", "[cli]") {
  TempDir dir("phonon");

  SECTION("conditioned state is dominated by one phonon") {
    const fs::path cfg = write_file(dir.path, "run.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\ntime_us = 9.0\nn_max = 4\n");
    REQUIRE(run_cli({"phonon-stats", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "phonon_stats.csv").string());
    REQUIRE(rows.size() == 6);
    CHECK(std::stod(rows[2][1]) > 0.99);  // P(1)
    CHECK(std::stod(rows[1][1]) < 0.01);  // P(0)
  }

  SECTION("ideal reference is exactly one phonon") {
    const fs::path cfg = write_file(dir.path, "ideal.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\nn_max = 4\n");
    REQUIRE(run_cli({"phonon-stats", "--config", cfg.string(), "--out",
                     dir.path.string(), "--ideal-fock", "1"}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "phonon_stats.csv").string());
    CHECK(std::stod(rows[2][1]) == Approx(1.0).margin(1e-9));
    CHECK(std::stod(rows[1][1]) == Approx(0.0).margin(1e-9));
  }

  SECTION("hot bath spreads the distribution") {
    std::string text = kReferenceParams;
    const auto pos = text.find("bath_temp_mk = 1.0");
    text.replace(pos, std::string("bath_temp_mk = 1.0").size(),
                 "bath_temp_mk = 50.0");
    const fs::path cfg = write_file(dir.path, "hot.cfg",
                                    text + "[scenario]\ntime_us = 9.0\nn_max = 6\n");
    REQUIRE(run_cli({"phonon-stats", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "phonon_stats.csv").string());
    CHECK(std::stod(rows[2][1]) < 0.5);  // no longer sharply peaked at 1
    CHECK(std::stod(rows[3][1]) > 0.2);
  }
}

TEST_CASE("temp sweep command", "[cli]") {
  TempDir dir("tsweep");

  SECTION("fidelity is non-increasing in temperature") {
    const fs::path cfg = write_file(
        dir.path, "run.cfg",
        std::string(kReferenceParams) +
            "[scenario]\ntemps_mk = 1, 5, 10, 15, 20, 25, 50\ntimes_us = 9.0\n");
    REQUIRE(run_cli({"temp-sweep", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "temp_sweep.csv").string());
    REQUIRE(rows.size() == 8);
    double previous = 2.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double fidelity = std::stod(rows[i][2]);
      CHECK(fidelity <= previous + 1e-12);
      previous = fidelity;
    }
  }

  SECTION("single cell and duplicated cells") {
    const fs::path cfg = write_file(dir.path, "single.cfg",
                                    std::string(kReferenceParams) +
                                        "[scenario]\ntemps_mk = 5\ntimes_us = 9.0\n");
    REQUIRE(run_cli({"temp-sweep", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    auto rows = cli::read_csv_file((dir.path / "temp_sweep.csv").string());
    REQUIRE(rows.size() == 2);

    const fs::path dup = write_file(
        dir.path, "dup.cfg",
        std::string(kReferenceParams) +
            "[scenario]\ntemps_mk = 5, 5\ntimes_us = 9.0\n");
    REQUIRE(run_cli({"temp-sweep", "--config", dup.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    rows = cli::read_csv_file((dir.path / "temp_sweep.csv").string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == rows[2]);
  }
}

TEST_CASE("entanglement command", "[cli]") {
  TempDir dir("entangle");

  SECTION("transient entanglement of the reference set") {
    const fs::path cfg = write_file(
        dir.path, "run.cfg",
        std::string(kReferenceParams) + "[scenario]\ntimes_us = 0.5, 2, 9\n");
    REQUIRE(run_cli({"entanglement", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "entanglement.csv").string());
    REQUIRE(rows.size() == 4);
    CHECK(std::stod(rows[3][1]) == Approx(4e-4).margin(4e-4));
    CHECK(std::stod(rows[3][1]) > 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::stod(rows[i][1]) > 0.0);
    }
  }

  SECTION("zero coupling means zero entanglement") {
    std::string text = kReferenceParams;
    const auto pos = text.find("laser_power_mw = 5.0");
    text.replace(pos, std::string("laser_power_mw = 5.0").size(),
                 "laser_power_mw = 0.0");
    const fs::path cfg = write_file(dir.path, "p0.cfg",
                                    text + "[scenario]\ntimes_us = 1, 9, 30\n");
    REQUIRE(run_cli({"entanglement", "--config", cfg.string(), "--out",
                     dir.path.string()}) == cli::kExitOk);
    const auto rows = cli::read_csv_file((dir.path / "entanglement.csv").string());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::stod(rows[i][1]) == 0.0);
    }
  }
}

TEST_CASE("artifacts are deterministic and round-trip", "[cli]") {
  TempDir dir("determinism");
  const fs::path cfg = write_file(
      dir.path, "run.cfg",
      std::string(kReferenceParams) +
          "[scenario]\ntimes_us = 1, 9\ntemps_mk = 1, 25\ntime_us = 9.0\n"
          "n_max = 4\ngrid_extent = 2.0\ngrid_resolution = 21\n");

  const fs::path out_a = dir.path / "a";
  const fs::path out_b = dir.path / "b";
  const std::vector<std::vector<std::string>> invocations = {
      {"derive"},       {"fidelity-sweep"}, {"wigner"},
      {"phonon-stats"}, {"temp-sweep"},     {"entanglement"},
  };
  for (const auto& invocation : invocations) {
    std::string manifest_a, manifest_b;
    std::vector<std::string> args = invocation;
    args.insert(args.end(), {"--config", cfg.string(), "--formats",
                             "csv,json,svg"});
    std::vector<std::string> args_a = args, args_b = args;
    args_a.insert(args_a.end(), {"--out", out_a.string()});
    args_b.insert(args_b.end(), {"--out", out_b.string()});
    REQUIRE(run_cli(args_a, &manifest_a) == cli::kExitOk);
    REQUIRE(run_cli(args_b, &manifest_b) == cli::kExitOk);

    // Same checksums up to the differing directory names.
    for (std::string* manifest : {&manifest_a, &manifest_b}) {
      // keep only "kind=... checksum=..." tails for comparison
      std::istringstream lines(*manifest);
      std::string line, tails;
      while (std::getline(lines, line)) {
        const auto at = line.find(" kind=");
        REQUIRE(at != std::string::npos);
        tails += line.substr(at) + "\n";
      }
      *manifest = tails;
    }
    CHECK(manifest_a == manifest_b);
  }

  // Byte-identical files across the two runs.
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(out_a)) {
    const fs::path twin = out_b / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(read_file(entry.path()) == read_file(twin));
    ++compared;
  }
  CHECK(compared >= 8);

  // Emitted CSV re-parses to the same doubles it was printed from.
  const auto rows = cli::read_csv_file((out_a / "fidelity_sweep.csv").string());
  const FidelityCurve curve = fidelity_time_sweep(
      testsupport::reference_params(), std::vector<double>{1e-6, 9e-6});
  REQUIRE(rows.size() == 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::stod(rows[i + 1][1]) == curve.points[i].fidelity);
    CHECK(std::stod(rows[i + 1][3]) == curve.points[i].log_negativity);
  }
}

TEST_CASE("CSV quoting round-trips awkward fields", "[cli]") {
  const std::vector<std::vector<std::string>> rows = {
      {"plain", "with,comma", "with \"quotes\"", "mixed, \"both\""},
      {"", "trailing", "multi\nline", "end"},
  };
  const std::string text = cli::render_csv("a,b,c,d", rows);
  const auto parsed = cli::parse_csv(text);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[1] == rows[0]);
  CHECK(parsed[2] == rows[1]);
}

TEST_CASE("usage and configuration exit codes", "[cli]") {
  TempDir dir("exitcodes");
  const fs::path cfg = write_file(dir.path, "run.cfg", kReferenceParams);

  CHECK(run_cli({"derive"}) == cli::kExitConfig);  // missing --config
  CHECK(run_cli({"derive", "--config", (dir.path / "absent.cfg").string()}) ==
        cli::kExitConfig);
  CHECK(run_cli({"derive", "--config", cfg.string(), "--formats", "tiff"}) ==
        cli::kExitConfig);

  const fs::path mismatched = write_file(
      dir.path, "mismatch.cfg",
      std::string(kReferenceParams) + "[scenario]\ncommand = wigner\n");
  CHECK(run_cli({"derive", "--config", mismatched.string()}) == cli::kExitConfig);

  const fs::path negative = write_file(dir.path, "neg.cfg", kReferenceParams);
  CHECK(run_cli({"wigner", "--config", negative.string(), "--ideal-fock",
                 "-1"}) == cli::kExitConfig);
}
