#include "gravdephase/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "gravdephase/emission.hpp"
#include "gravdephase/errors.hpp"
#include "gravdephase/io.hpp"
#include "gravdephase/modes.hpp"
#include "gravdephase/parallel.hpp"
#include "gravdephase/rng.hpp"

namespace gd {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict JSON reading

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("wrong type for '" + std::string(key) + "' in " + where);
  }
}

template <class T>
void read_opt(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  T value{};
  read(obj, key, value, where);
  out = value;
}

Vec3 to_vec3(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(what + " must be an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(what + " must be an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

json from_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// ---------------------------------------------------------------------------
// Derived physics objects

WeakFieldMetric make_metric(const RunConfig& cfg) {
  WeakFieldMetric m;
  if (cfg.metric.a) {
    m.a = *cfg.metric.a;
  } else if (cfg.metric.g) {
    m.a = surface_param_a(*cfg.metric.g, cfg.constants);
  }
  m.z0 = cfg.metric.z0;
  m.r_s = cfg.metric.r_s;
  m.validate();
  return m;
}

SpectrumParams make_params(const RunConfig& cfg) {
  const auto& s = cfg.spectrum;
  SpectrumParams p = SpectrumParams::resonant(s.theta0, s.phi0, s.nu, s.gamma, make_metric(cfg),
                                              s.Z, cfg.constants);
  p.validate();
  return p;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ScenarioResult {
  std::string csv;
  json results;
  std::string summary;
  bool agreement = true;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name, contents
};

json params_json(const SpectrumParams& p) {
  return {{"k0", from_vec3(p.k0)},
          {"nu", p.nu},
          {"gamma", p.gamma},
          {"a", p.metric.a},
          {"z0", p.metric.z0},
          {"Z", p.Z},
          {"theta0", p.theta0()},
          {"c", p.constants.c}};
}

// ---------------------------------------------------------------------------
// Scenarios

ScenarioResult scenario_spreads(const RunConfig& cfg) {
  const SpectrumParams p = make_params(cfg);
  const WavevectorSpread k_spread = wavevector_spread(p);
  const double dw = frequency_spread(p);
  ScenarioResult r;
  std::ostringstream csv;
  csv << "quantity,value,unit\n";
  csv << "frequency_spread," << format_double(dw) << ",1/s\n";
  csv << "wavevector_spread_quoted," << format_double(k_spread.quoted) << ",1/m\n";
  csv << "wavevector_spread_kernel_decay," << format_double(k_spread.kernel_decay) << ",1/m\n";
  csv << "a," << format_double(p.metric.a) << ",1/m\n";
  csv << "cos_theta0," << format_double(p.cos_theta0()) << ",1\n";
  r.csv = csv.str();
  r.results = {{"frequency_spread", dw},
               {"wavevector_spread_quoted", k_spread.quoted},
               {"wavevector_spread_kernel_decay", k_spread.kernel_decay},
               {"params", params_json(p)}};
  r.summary = fmt::format(
      "delta_omega = {:.6g} 1/s (a = {:.6g} 1/m, nu = {:.6g} 1/s, Gamma = {:.6g} 1/s, "
      "cos(theta0) = {:.6g})\n"
      "wavevector spread: quoted (a nu/Gamma) cos(theta0) = {:.6g} 1/m, kernel decay a nu/Gamma = "
      "{:.6g} 1/m\n",
      dw, p.metric.a, p.nu, p.gamma, p.cos_theta0(), k_spread.quoted, k_spread.kernel_decay);
  return r;
}

ScenarioResult scenario_flat_dicke(const RunConfig& cfg) {
  SpectrumParams p = make_params(cfg);
  const double wavelength = 2.0 * kPi / p.k0.norm();
  EnsembleSpec spec;
  spec.n_atoms = cfg.ensemble.n_atoms;
  spec.box.center = cfg.ensemble.box_center;
  spec.box.edges = cfg.ensemble.box_edges.value_or(Vec3::Constant(100.0 * wavelength));
  spec.nu = p.nu;
  spec.gamma = p.gamma;
  spec.dipole = cfg.ensemble.dipole;
  const Ensemble ensemble = sample_ensemble(spec, cfg.seed, 0);
  const TimedDickeState state = flat_timed_dicke(ensemble, p.k0);

  std::vector<Vec3> positions;
  positions.reserve(ensemble.size());
  for (const auto& atom : ensemble.atoms) positions.push_back(atom.r);

  const double L = spec.box.edges.minCoeff();
  std::vector<Vec3> dks{Vec3::Zero()};
  CounterRng rng(cfg.seed, 1);
  for (std::size_t i = 0; i < cfg.structure.n_dk; ++i) {
    const double cos_t = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double mag = rng.uniform(cfg.structure.min_dk_L, cfg.structure.max_dk_L) / L;
    dks.emplace_back(mag * sin_t * std::cos(phi), mag * sin_t * std::sin(phi), mag * cos_t);
  }

  std::vector<double> s(dks.size());
  parallel_for(dks.size(), cfg.threads, [&](std::size_t i) { s[i] = structure_factor(positions, dks[i]); });

  std::ostringstream csv;
  csv << "dk_x,dk_y,dk_z,dk_L,structure_factor,expected\n";
  double off_peak_sum = 0.0;
  for (std::size_t i = 0; i < dks.size(); ++i) {
    const double expected = expected_structure_factor(ensemble.size(), spec.box.edges, dks[i]);
    csv << format_double(dks[i].x()) << ',' << format_double(dks[i].y()) << ','
        << format_double(dks[i].z()) << ',' << format_double(dks[i].norm() * L) << ','
        << format_double(s[i]) << ',' << format_double(expected) << '\n';
    if (i > 0) off_peak_sum += s[i];
  }
  const double n = static_cast<double>(ensemble.size());
  const double mean_off = dks.size() > 1 ? off_peak_sum / static_cast<double>(dks.size() - 1) : 0.0;

  ScenarioResult r;
  r.csv = csv.str();
  r.agreement = std::abs(s[0] - 1.0) <= 1e-12;
  r.results = {{"n_atoms", ensemble.size()},
               {"box_edges", from_vec3(spec.box.edges)},
               {"peak_structure_factor", s[0]},
               {"mean_off_peak_structure_factor", mean_off},
               {"mean_off_peak_times_n", mean_off * n},
               {"state_norm", state.norm()},
               {"params", params_json(p)}};
  r.summary = fmt::format(
      "N = {}, box edge = {:.6g} m\nS(0) = {:.17g}\nmean off-peak S = {:.6g} (= {:.4g}/N)\n",
      ensemble.size(), L, s[0], mean_off, mean_off * n);
  if (cfg.ensemble.write_ensemble) {
    std::ostringstream ens;
    write_ensemble_csv(ens, ensemble);
    r.extra_files.emplace_back("ensemble.csv", ens.str());
  }
  return r;
}

ScenarioResult scenario_curved_spectrum(const RunConfig& cfg) {
  const SpectrumParams p = make_params(cfg);
  if (!(p.metric.a > 0.0)) throw ConfigError("curved-spectrum needs a > 0");
  const std::vector<double> grid =
      kernel_grid(p, cfg.spectrum.x_min, cfg.spectrum.x_max, cfg.spectrum.x_step);

  EnsembleSpec spec;
  spec.n_atoms = cfg.ensemble.n_atoms;
  spec.box.center = cfg.ensemble.box_center;
  const double decay_length = p.gamma / (p.metric.a * p.nu);
  spec.box.edges = cfg.ensemble.box_edges.value_or(Vec3(1.0, 1.0, 100.0 * decay_length));
  spec.nu = p.nu;
  spec.gamma = p.gamma;
  spec.dipole = cfg.ensemble.dipole;

  OracleOptions oracle;
  oracle.window = {spec.box.center.z() - 0.5 * spec.box.edges.z(),
                   spec.box.center.z() + 0.5 * spec.box.edges.z(), cfg.oracle.taper_fraction};
  oracle.rel_tol = cfg.oracle.rel_tol;
  oracle.gradient = cfg.oracle.gradient;
  oracle.volume_weight = cfg.ensemble.volume_weight;
  oracle.min_decay_lengths = cfg.oracle.min_decay_lengths;

  AngularSpectrum quad = quadrature_spectrum(grid, p, oracle, cfg.threads);
  std::size_t ref = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(quad.amplitude[i]) > std::abs(quad.amplitude[ref])) ref = i;
  }
  normalize_to(quad, ref);

  AngularSpectrum analytic = analytic_spectrum(grid, p);
  if (std::abs(analytic.amplitude[ref]) > 0.0) normalize_to(analytic, ref);

  ReplicaSpec rspec;
  rspec.ensemble = spec;
  rspec.replicas = cfg.ensemble.replicas;
  rspec.seed = cfg.seed;
  if (cfg.ensemble.curved_state) {
    rspec.curved_state = FCorrectionParams{cfg.ensemble.f_beta, cfg.ensemble.f_gamma};
  }
  MonteCarloOptions mc_opts;
  mc_opts.batches = cfg.ensemble.batches;
  mc_opts.volume_weight = cfg.ensemble.volume_weight;
  const ReplicaSpectra mc = monte_carlo_replicas(rspec, grid, p, mc_opts, cfg.threads, ref);

  std::size_t within = 0;
  double max_dev = 0.0;
  double max_z = 0.0;
  double prob_above = 0.0;
  double prob_total = 0.0;
  std::string table = fmt::format("{:>14} {:>12} {:>12} {:>12} {:>8}\n", "k_z", "|G| norm",
                                  "|quad| norm", "|MC| norm", "z-score");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // The reference point is 1 in every replica by construction.
    const double dev = i == ref ? 0.0 : std::abs(mc.mean.amplitude[i] - quad.amplitude[i]);
    const double se = mc.mean.stderr_amp[i];
    const double z = i == ref ? 0.0 : (se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY));
    if (i != ref && z <= cfg.tolerances.mc_sigma) ++within;
    max_dev = std::max(max_dev, dev);
    max_z = std::max(max_z, z);
    const double prob = std::norm(mc.mean.amplitude[i]);
    prob_total += prob;
    if (grid[i] > p.k0z()) prob_above += prob;
    table += fmt::format("{:>14.6g} {:>12.6g} {:>12.6g} {:>12.6g} {:>8.3f}\n", grid[i],
                         std::abs(analytic.amplitude[i]), std::abs(quad.amplitude[i]),
                         std::abs(mc.mean.amplitude[i]), z);
  }
  const double fraction =
      grid.size() > 1 ? static_cast<double>(within) / static_cast<double>(grid.size() - 1) : 1.0;
  const double asymmetry = prob_total > 0.0 ? prob_above / prob_total : 0.0;

  std::ostringstream csv;
  csv << kSpectrumCsvHeader << '\n';
  write_spectrum_rows(csv, analytic);
  write_spectrum_rows(csv, quad);
  write_spectrum_rows(csv, mc.mean);

  ScenarioResult r;
  r.csv = csv.str();
  r.agreement = fraction >= cfg.tolerances.mc_fraction && asymmetry <= cfg.tolerances.asymmetry;
  r.results = {{"n_atoms", spec.n_atoms},
               {"replicas", rspec.replicas},
               {"box_edges", from_vec3(spec.box.edges)},
               {"box_center", from_vec3(spec.box.center)},
               {"window_decay_lengths", window_decay_lengths(oracle.window, p)},
               {"reference_index", ref},
               {"fraction_within_sigma", fraction},
               {"max_abs_deviation", max_dev},
               {"max_z_score", max_z},
               {"probability_above_k0z", asymmetry},
               {"params", params_json(p)}};
  r.summary = table + fmt::format(
                          "fraction within {} sigma: {:.4f} (need >= {})\nmax |MC - quad| = {:.4g}, "
                          "max z = {:.3f}\nprobability above k0z: {:.4g} (limit {})\n",
                          cfg.tolerances.mc_sigma, fraction, cfg.tolerances.mc_fraction, max_dev,
                          max_z, asymmetry, cfg.tolerances.asymmetry);
  return r;
}

ScenarioResult scenario_delta_limit(const RunConfig& cfg) {
  SpectrumParams p = make_params(cfg);
  if (cfg.delta_limit.a_values.empty()) throw ConfigError("delta_limit.a_values is empty");
  p.metric.a = cfg.delta_limit.a_values.front();
  const std::vector<double> grid =
      kernel_grid(p, cfg.spectrum.x_min, cfg.spectrum.x_max, cfg.spectrum.x_step);
  const auto steps = flat_delta_limit(grid, p, cfg.delta_limit.a_values);

  std::ostringstream csv;
  csv << kSpectrumCsvHeader << '\n';
  json rows = json::array();
  std::string summary =
      fmt::format("{:>12} {:>14} {:>14} {:>14} {:>14}\n", "a", "peak |G|", "1/e width",
                  "Re area", "Im area");
  bool ok = true;
  const double expected_area = -1.0 / p.gamma;
  for (const auto& step : steps) {
    write_spectrum_rows(csv, step.spectrum);
    const double rel = std::abs(step.area - cdouble(0.0, expected_area)) / std::abs(expected_area);
    ok = ok && rel <= cfg.tolerances.area_rel;
    rows.push_back({{"a", step.a},
                    {"peak", step.peak},
                    {"measured_width", std::isnan(step.measured_width) ? json() : json(step.measured_width)},
                    {"kernel_decay", step.a * p.nu / p.gamma},
                    {"area_re", step.area.real()},
                    {"area_im", step.area.imag()},
                    {"area_rel_error", rel}});
    summary += fmt::format("{:>12.6g} {:>14.6g} {:>14.6g} {:>14.6g} {:>14.10g}\n", step.a,
                           step.peak, step.measured_width, step.area.real(), step.area.imag());
  }
  ScenarioResult r;
  r.csv = csv.str();
  r.agreement = ok;
  r.results = {{"steps", rows}, {"expected_area_im", expected_area}, {"params", params_json(p)}};
  r.summary = summary;
  return r;
}

Vec3 random_direction(CounterRng& rng, double min_cos) {
  for (;;) {
    const double cos_t = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    if (std::abs(cos_t) < min_cos) continue;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
  }
}

ScenarioResult scenario_verify_modes(const RunConfig& cfg) {
  const auto& v = cfg.verify;
  if (v.a_values.size() < 2) throw ConfigError("verify.a_values needs at least two entries");
  const WeakFieldMetric base = make_metric(cfg);
  const double k_mag = cfg.spectrum.nu / cfg.constants.c;

  struct ModeRun {
    ModeIndex index;
    SpacetimePoint point;
    std::vector<ResidualReport> reports;
    std::vector<double> gauss_ablated;
    double wave_slope = 0.0;
    double gauss_slope = 0.0;
    double gauss_slope_ablated = 0.0;
    std::string vectors;
  };
  std::vector<ModeRun> runs(v.modes);
  CounterRng rng(cfg.seed, 2);
  for (auto& run : runs) {
    run.index.k = k_mag * random_direction(rng, v.min_cos);
    run.index.s = v.s;
    run.point.t = rng.uniform(0.0, 1.0);
    run.point.r = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), base.z0 + v.z_offset);
  }

  parallel_for(runs.size(), cfg.threads, [&](std::size_t i) {
    ModeRun& run = runs[i];
    std::vector<double> wave, gauss;
    std::ostringstream vec;
    for (double a : v.a_values) {
      WeakFieldMetric m = base;
      m.a = a;
      ModeCorrections full;
      full.gauss_constant = true;
      const PerturbedMode mode(run.index, m, cfg.constants, 1.0, full);
      run.reports.push_back(wave_residual(mode, run.point, cfg.stencil));
      wave.push_back(run.reports.back().residual_vector.norm());
      gauss.push_back(std::abs(run.reports.back().gauss_residual));

      ModeCorrections ablated = full;
      ablated.gauss_constant = false;
      const PerturbedMode plain(run.index, m, cfg.constants, 1.0, ablated);
      run.gauss_ablated.push_back(std::abs(gauss_residual(plain, run.point, cfg.stencil).value));
      write_mode_vector_row(vec, plain, run.point.r.z());
    }
    run.wave_slope = loglog_slope(v.a_values, wave);
    run.gauss_slope = loglog_slope(v.a_values, gauss);
    run.gauss_slope_ablated = loglog_slope(v.a_values, run.gauss_ablated);
    run.vectors = vec.str();
  });

  std::ostringstream csv;
  csv << "kx,ky,kz,s,a,t,x,y,z,res_x_re,res_x_im,res_y_re,res_y_im,res_z_re,res_z_im,gauss_re,"
         "gauss_im,disc_est,gauss_disc_est,inconclusive,wave_slope,gauss_slope,gauss_slope_no_c3\n";
  std::string vectors = std::string(kModeVectorHeader) + "\n";
  bool ok = true;
  json per_mode = json::array();
  std::string summary = fmt::format("{:>4} {:>28} {:>10} {:>10} {:>14}\n", "mode", "k", "wave",
                                    "gauss", "gauss (no C3)");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ModeRun& run = runs[i];
    for (std::size_t j = 0; j < v.a_values.size(); ++j) {
      const ResidualReport& rep = run.reports[j];
      const Vec3& k = run.index.k;
      csv << format_double(k.x()) << ',' << format_double(k.y()) << ',' << format_double(k.z())
          << ',' << run.index.s << ',' << format_double(v.a_values[j]) << ','
          << format_double(rep.point.t) << ',' << format_double(rep.point.r.x()) << ','
          << format_double(rep.point.r.y()) << ',' << format_double(rep.point.r.z());
      for (int c = 0; c < 3; ++c) {
        csv << ',' << format_double(rep.residual_vector[c].real()) << ','
            << format_double(rep.residual_vector[c].imag());
      }
      csv << ',' << format_double(rep.gauss_residual.real()) << ','
          << format_double(rep.gauss_residual.imag()) << ','
          << format_double(rep.discretization_estimate) << ','
          << format_double(rep.gauss_discretization_estimate) << ',' << (rep.inconclusive ? 1 : 0)
          << ',' << format_double(run.wave_slope) << ',' << format_double(run.gauss_slope) << ','
          << format_double(run.gauss_slope_ablated) << '\n';
    }
    vectors += run.vectors;
    const bool mode_ok = std::abs(run.wave_slope - 2.0) <= cfg.tolerances.slope &&
                         std::abs(run.gauss_slope - 2.0) <= cfg.tolerances.slope;
    ok = ok && mode_ok;
    per_mode.push_back({{"k", from_vec3(run.index.k)},
                        {"s", run.index.s},
                        {"wave_slope", run.wave_slope},
                        {"gauss_slope", run.gauss_slope},
                        {"gauss_slope_without_c3", run.gauss_slope_ablated}});
    summary += fmt::format("{:>4} ({:>8.4f},{:>8.4f},{:>8.4f}) {:>10.4f} {:>10.4f} {:>14.4f}\n", i,
                           run.index.k.x(), run.index.k.y(), run.index.k.z(), run.wave_slope,
                           run.gauss_slope, run.gauss_slope_ablated);
  }

  ScenarioResult r;
  r.csv = csv.str();
  r.agreement = ok;
  r.results = {{"modes", per_mode}, {"a_values", v.a_values}, {"slope_target", 2.0}};
  r.summary = summary;
  r.extra_files.emplace_back("mode_vectors.csv", vectors);
  return r;
}

json tolerance_json(const RunConfig::Tolerances& t) {
  return {{"mc_sigma", t.mc_sigma},
          {"mc_fraction", t.mc_fraction},
          {"asymmetry", t.asymmetry},
          {"slope", t.slope},
          {"area_rel", t.area_rel}};
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"verify-modes", "flat-dicke", "curved-spectrum",
                                              "spreads", "delta-limit"};
  return names;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "config",
             {"scenario", "seed", "output_dir", "unit_regime", "threads", "constants", "metric",
              "spectrum", "ensemble", "oracle", "stencil", "verify", "structure", "delta_limit",
              "tolerances"});
  RunConfig cfg;
  read(doc, "unit_regime", cfg.unit_regime, "config");
  if (cfg.unit_regime == "si") {
    cfg.constants = PhysicalConstants::si();
    cfg.spectrum.nu = 1e15;
    cfg.spectrum.gamma = 1e8;
    cfg.spectrum.theta0 = 0.0;
    cfg.metric.g = 9.81;
  } else if (cfg.unit_regime == "scaled") {
    cfg.metric.a = 1e-3;
  } else {
    throw ConfigError("unit_regime must be 'si' or 'scaled'");
  }

  read(doc, "scenario", cfg.scenario, "config");
  const auto& names = scenario_names();
  require(std::find(names.begin(), names.end(), cfg.scenario) != names.end(),
          "unknown scenario '" + cfg.scenario + "'");
  read(doc, "seed", cfg.seed, "config");
  std::string out_dir = cfg.output_dir.string();
  read(doc, "output_dir", out_dir, "config");
  cfg.output_dir = out_dir;
  read(doc, "threads", cfg.threads, "config");
  require(cfg.threads >= 1, "threads must be >= 1");

  if (doc.contains("constants")) {
    const json& c = doc["constants"];
    check_keys(c, "constants", {"c", "hbar", "eps0", "G_newton"});
    read(c, "c", cfg.constants.c, "constants");
    read(c, "hbar", cfg.constants.hbar, "constants");
    read(c, "eps0", cfg.constants.eps0, "constants");
    read(c, "G_newton", cfg.constants.G_newton, "constants");
  }
  try {
    cfg.constants.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("metric")) {
    const json& m = doc["metric"];
    check_keys(m, "metric", {"a", "g", "z0", "r_s"});
    require(!(m.contains("a") && m.contains("g")), "metric: give either 'a' or 'g', not both");
    if (m.contains("a")) cfg.metric.g.reset();
    if (m.contains("g")) cfg.metric.a.reset();
    read_opt(m, "a", cfg.metric.a, "metric");
    read_opt(m, "g", cfg.metric.g, "metric");
    read(m, "z0", cfg.metric.z0, "metric");
    read_opt(m, "r_s", cfg.metric.r_s, "metric");
  }
  require(!cfg.metric.a || *cfg.metric.a >= 0.0, "metric.a must be >= 0");
  require(!cfg.metric.g || *cfg.metric.g >= 0.0, "metric.g must be >= 0");

  if (doc.contains("spectrum")) {
    const json& s = doc["spectrum"];
    check_keys(s, "spectrum", {"nu", "gamma", "theta0", "phi0", "Z", "x_min", "x_max", "x_step"});
    read(s, "nu", cfg.spectrum.nu, "spectrum");
    read(s, "gamma", cfg.spectrum.gamma, "spectrum");
    read(s, "theta0", cfg.spectrum.theta0, "spectrum");
    read(s, "phi0", cfg.spectrum.phi0, "spectrum");
    read(s, "Z", cfg.spectrum.Z, "spectrum");
    read(s, "x_min", cfg.spectrum.x_min, "spectrum");
    read(s, "x_max", cfg.spectrum.x_max, "spectrum");
    read(s, "x_step", cfg.spectrum.x_step, "spectrum");
  }
  require(cfg.spectrum.nu > 0.0 && cfg.spectrum.gamma > 0.0, "spectrum: nu and gamma must be > 0");
  require(cfg.spectrum.x_step > 0.0 && cfg.spectrum.x_max > cfg.spectrum.x_min,
          "spectrum: need x_min < x_max and x_step > 0");

  if (doc.contains("ensemble")) {
    const json& e = doc["ensemble"];
    check_keys(e, "ensemble",
               {"n_atoms", "replicas", "box_edges", "box_center", "dipole", "curved_state",
                "f_beta", "f_gamma", "volume_weight", "batches", "write_ensemble"});
    read(e, "n_atoms", cfg.ensemble.n_atoms, "ensemble");
    read(e, "replicas", cfg.ensemble.replicas, "ensemble");
    if (e.contains("box_edges")) cfg.ensemble.box_edges = to_vec3(e["box_edges"], "ensemble.box_edges");
    if (e.contains("box_center")) cfg.ensemble.box_center = to_vec3(e["box_center"], "ensemble.box_center");
    if (e.contains("dipole")) cfg.ensemble.dipole = to_vec3(e["dipole"], "ensemble.dipole");
    read(e, "curved_state", cfg.ensemble.curved_state, "ensemble");
    read(e, "f_beta", cfg.ensemble.f_beta, "ensemble");
    read(e, "f_gamma", cfg.ensemble.f_gamma, "ensemble");
    read(e, "volume_weight", cfg.ensemble.volume_weight, "ensemble");
    read(e, "batches", cfg.ensemble.batches, "ensemble");
    read(e, "write_ensemble", cfg.ensemble.write_ensemble, "ensemble");
  }
  require(cfg.ensemble.n_atoms >= 1, "ensemble.n_atoms must be >= 1");
  require(cfg.ensemble.replicas >= 1, "ensemble.replicas must be >= 1");
  require(!cfg.ensemble.box_edges || (cfg.ensemble.box_edges->array() > 0.0).all(),
          "ensemble.box_edges must be positive");

  if (doc.contains("oracle")) {
    const json& o = doc["oracle"];
    check_keys(o, "oracle", {"taper_fraction", "rel_tol", "gradient", "min_decay_lengths"});
    read(o, "taper_fraction", cfg.oracle.taper_fraction, "oracle");
    read(o, "rel_tol", cfg.oracle.rel_tol, "oracle");
    read(o, "min_decay_lengths", cfg.oracle.min_decay_lengths, "oracle");
    if (o.contains("gradient")) {
      std::string g;
      read(o, "gradient", g, "oracle");
      require(g == "mode" || g == "resonant", "oracle.gradient must be 'mode' or 'resonant'");
      cfg.oracle.gradient = g == "mode" ? GradientFrequency::mode : GradientFrequency::resonant;
    }
  }
  require(cfg.oracle.taper_fraction >= 0.0 && cfg.oracle.taper_fraction <= 1.0,
          "oracle.taper_fraction must lie in [0, 1]");
  require(cfg.oracle.rel_tol > 0.0, "oracle.rel_tol must be > 0");

  if (doc.contains("stencil")) {
    const json& s = doc["stencil"];
    check_keys(s, "stencil", {"h_t", "h_x", "h_y", "h_z", "order"});
    read(s, "h_t", cfg.stencil.h_t, "stencil");
    read(s, "h_x", cfg.stencil.h_x, "stencil");
    read(s, "h_y", cfg.stencil.h_y, "stencil");
    read(s, "h_z", cfg.stencil.h_z, "stencil");
    read(s, "order", cfg.stencil.order, "stencil");
  }
  try {
    cfg.stencil.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    check_keys(v, "verify", {"modes", "a_values", "z_offset", "min_cos", "s"});
    read(v, "modes", cfg.verify.modes, "verify");
    read(v, "a_values", cfg.verify.a_values, "verify");
    read(v, "z_offset", cfg.verify.z_offset, "verify");
    read(v, "min_cos", cfg.verify.min_cos, "verify");
    read(v, "s", cfg.verify.s, "verify");
  }
  require(cfg.verify.s == 1 || cfg.verify.s == 2, "verify.s must be 1 or 2");
  require(cfg.verify.min_cos > 0.0 && cfg.verify.min_cos < 1.0, "verify.min_cos must be in (0, 1)");

  if (doc.contains("structure")) {
    const json& s = doc["structure"];
    check_keys(s, "structure", {"n_dk", "min_dk_L", "max_dk_L"});
    read(s, "n_dk", cfg.structure.n_dk, "structure");
    read(s, "min_dk_L", cfg.structure.min_dk_L, "structure");
    read(s, "max_dk_L", cfg.structure.max_dk_L, "structure");
  }
  require(cfg.structure.max_dk_L >= cfg.structure.min_dk_L && cfg.structure.min_dk_L >= 0.0,
          "structure: need 0 <= min_dk_L <= max_dk_L");

  if (doc.contains("delta_limit")) {
    const json& d = doc["delta_limit"];
    check_keys(d, "delta_limit", {"a_values"});
    read(d, "a_values", cfg.delta_limit.a_values, "delta_limit");
  }
  for (double a : cfg.delta_limit.a_values) require(a > 0.0, "delta_limit.a_values must be > 0");

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    check_keys(t, "tolerances", {"mc_sigma", "mc_fraction", "asymmetry", "slope", "area_rel"});
    read(t, "mc_sigma", cfg.tolerances.mc_sigma, "tolerances");
    read(t, "mc_fraction", cfg.tolerances.mc_fraction, "tolerances");
    read(t, "asymmetry", cfg.tolerances.asymmetry, "tolerances");
    read(t, "slope", cfg.tolerances.slope, "tolerances");
    read(t, "area_rel", cfg.tolerances.area_rel, "tolerances");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json metric = {{"z0", cfg.metric.z0}};
  if (cfg.metric.a) metric["a"] = *cfg.metric.a;
  if (cfg.metric.g) metric["g"] = *cfg.metric.g;
  if (cfg.metric.r_s) metric["r_s"] = *cfg.metric.r_s;
  json ensemble = {{"n_atoms", cfg.ensemble.n_atoms},
                   {"replicas", cfg.ensemble.replicas},
                   {"box_center", from_vec3(cfg.ensemble.box_center)},
                   {"dipole", from_vec3(cfg.ensemble.dipole)},
                   {"curved_state", cfg.ensemble.curved_state},
                   {"f_beta", cfg.ensemble.f_beta},
                   {"f_gamma", cfg.ensemble.f_gamma},
                   {"volume_weight", cfg.ensemble.volume_weight},
                   {"batches", cfg.ensemble.batches},
                   {"write_ensemble", cfg.ensemble.write_ensemble}};
  if (cfg.ensemble.box_edges) ensemble["box_edges"] = from_vec3(*cfg.ensemble.box_edges);
  return {
      {"scenario", cfg.scenario},
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir.string()},
      {"unit_regime", cfg.unit_regime},
      {"threads", cfg.threads},
      {"constants",
       {{"c", cfg.constants.c},
        {"hbar", cfg.constants.hbar},
        {"eps0", cfg.constants.eps0},
        {"G_newton", cfg.constants.G_newton}}},
      {"metric", metric},
      {"spectrum",
       {{"nu", cfg.spectrum.nu},
        {"gamma", cfg.spectrum.gamma},
        {"theta0", cfg.spectrum.theta0},
        {"phi0", cfg.spectrum.phi0},
        {"Z", cfg.spectrum.Z},
        {"x_min", cfg.spectrum.x_min},
        {"x_max", cfg.spectrum.x_max},
        {"x_step", cfg.spectrum.x_step}}},
      {"ensemble", ensemble},
      {"oracle",
       {{"taper_fraction", cfg.oracle.taper_fraction},
        {"rel_tol", cfg.oracle.rel_tol},
        {"gradient", cfg.oracle.gradient == GradientFrequency::mode ? "mode" : "resonant"},
        {"min_decay_lengths", cfg.oracle.min_decay_lengths}}},
      {"stencil",
       {{"h_t", cfg.stencil.h_t},
        {"h_x", cfg.stencil.h_x},
        {"h_y", cfg.stencil.h_y},
        {"h_z", cfg.stencil.h_z},
        {"order", cfg.stencil.order}}},
      {"verify",
       {{"modes", cfg.verify.modes},
        {"a_values", cfg.verify.a_values},
        {"z_offset", cfg.verify.z_offset},
        {"min_cos", cfg.verify.min_cos},
        {"s", cfg.verify.s}}},
      {"structure",
       {{"n_dk", cfg.structure.n_dk},
        {"min_dk_L", cfg.structure.min_dk_L},
        {"max_dk_L", cfg.structure.max_dk_L}}},
      {"delta_limit", {{"a_values", cfg.delta_limit.a_values}}},
      {"tolerances", tolerance_json(cfg.tolerances)},
  };
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome outcome;
  auto fail = [&](int code, const std::string& kind, const std::string& message) {
    outcome.exit_code = code;
    outcome.report = {{"error", kind}, {"message", message}, {"exit_code", code},
                      {"scenario", cfg.scenario}};
    outcome.summary = "error (" + kind + "): " + message + "\n";
    try {
      const auto path = cfg.output_dir / "error.json";
      write_text_file(path, outcome.report.dump(2) + "\n");
      outcome.files.push_back(path);
    } catch (const std::exception&) {
      // the report still reaches the caller through `outcome`
    }
  };

  try {
    ScenarioResult result;
    if (cfg.scenario == "spreads") {
      result = scenario_spreads(cfg);
    } else if (cfg.scenario == "flat-dicke") {
      result = scenario_flat_dicke(cfg);
    } else if (cfg.scenario == "curved-spectrum") {
      result = scenario_curved_spectrum(cfg);
    } else if (cfg.scenario == "delta-limit") {
      result = scenario_delta_limit(cfg);
    } else if (cfg.scenario == "verify-modes") {
      result = scenario_verify_modes(cfg);
    } else {
      throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    }

    const auto csv_path = cfg.output_dir / (cfg.scenario + ".csv");
    write_text_file(csv_path, result.csv);
    outcome.files.push_back(csv_path);
    for (const auto& [name, contents] : result.extra_files) {
      const auto path = cfg.output_dir / name;
      write_text_file(path, contents);
      outcome.files.push_back(path);
    }

    json meta = {{"scenario", cfg.scenario},
                 {"seed", cfg.seed},
                 {"timestamp", timestamp_utc()},
                 {"threads", cfg.threads},
                 {"unit_regime", cfg.unit_regime},
                 {"tolerances", tolerance_json(cfg.tolerances)},
                 {"agreement", result.agreement},
                 {"results", result.results}};
    const auto meta_path = cfg.output_dir / (cfg.scenario + ".json");
    write_text_file(meta_path, meta.dump(2) + "\n");
    outcome.files.push_back(meta_path);
    const auto cfg_path = cfg.output_dir / "resolved_config.json";
    write_text_file(cfg_path, to_json(cfg).dump(2) + "\n");
    outcome.files.push_back(cfg_path);

    outcome.report = meta;
    outcome.summary = result.summary;
    if (!result.agreement) {
      outcome.exit_code = kExitOracleDisagreement;
      outcome.summary += "oracle disagreement beyond tolerance\n";
    }
  } catch (const ConfigError& e) {
    fail(kExitInvalidConfig, "invalid_config", e.what());
  } catch (const DomainError& e) {
    fail(kExitDomainError, "domain_error", e.what());
  } catch (const ConvergenceError& e) {
    fail(kExitFailure, "convergence_error", e.what());
  } catch (const std::exception& e) {
    fail(kExitFailure, "runtime_error", e.what());
  }
  return outcome;
}

}  // namespace gd
