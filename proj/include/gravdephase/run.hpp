#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravdephase/maxwell_verify.hpp"
#include "gravdephase/metric.hpp"
#include "gravdephase/spectrum.hpp"

namespace gd {

/// Scenario configuration. Parsed strictly from JSON: unknown keys at any level
/// are rejected. Defaults depend on `unit_regime` ("scaled" or "si").
struct RunConfig {
  struct Metric {
    std::optional<double> a;  // 1/m
    std::optional<double> g;  // m/s^2, used when a is absent
    double z0 = 0.0;
    std::optional<double> r_s;
  };
  struct Spectrum {
    double nu = 1.0;
    double gamma = 1e-2;
    double theta0 = kPi / 3.0;
    double phi0 = 0.0;
    double Z = 0.0;
    // k_z grid in units of the kernel width a nu / Gamma below k0z.
    double x_min = -3.0;
    double x_max = 7.0;
    double x_step = 0.25;
  };
  struct EnsembleCfg {
    std::size_t n_atoms = 10000;
    std::size_t replicas = 20;
    std::optional<Vec3> box_edges;  // default depends on the scenario
    Vec3 box_center = Vec3::Zero();
    Vec3 dipole = Vec3::UnitX();
    bool curved_state = false;
    double f_beta = 0.0;
    double f_gamma = 0.0;
    bool volume_weight = false;
    std::size_t batches = 20;
    bool write_ensemble = false;
  };
  struct Oracle {
    double taper_fraction = 0.0;
    double rel_tol = 1e-10;
    GradientFrequency gradient = GradientFrequency::mode;
    double min_decay_lengths = 0.0;
  };
  struct Verify {
    std::size_t modes = 10;
    std::vector<double> a_values{1e-4, 1e-3, 1e-2};
    double z_offset = 1.0;
    double min_cos = 0.1;
    int s = 2;
  };
  struct Structure {
    std::size_t n_dk = 50;
    double min_dk_L = 20.0 * kPi;
    double max_dk_L = 40.0 * kPi;
  };
  struct DeltaLimit {
    std::vector<double> a_values{8e-3, 4e-3, 2e-3, 1e-3};
  };
  struct Tolerances {
    double mc_sigma = 3.0;
    double mc_fraction = 0.95;
    double asymmetry = 0.01;
    double slope = 0.1;
    double area_rel = 1e-8;
  };

  std::string scenario;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  std::string unit_regime = "scaled";
  unsigned threads = 1;
  PhysicalConstants constants = PhysicalConstants::scaled();
  Metric metric;
  Spectrum spectrum;
  EnsembleCfg ensemble;
  Oracle oracle;
  StencilSpec stencil;
  Verify verify;
  Structure structure;
  DeltaLimit delta_limit;
  Tolerances tolerances;
};

/// Names accepted in the "scenario" field.
const std::vector<std::string>& scenario_names();

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration, defaults included.
nlohmann::json to_json(const RunConfig& config);

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidConfig = 2,
  kExitDomainError = 3,
  kExitOracleDisagreement = 4,
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string summary;              // human-readable lines for stdout
  nlohmann::json report;            // machine-readable results or error report
  std::vector<std::filesystem::path> files;
};

/// Runs one scenario and writes <scenario>.csv, <scenario>.json and
/// resolved_config.json under output_dir. Errors are reported through the exit
/// code and an error.json file rather than thrown.
RunOutcome run(const RunConfig& config);

}  // namespace gd
