#include "gravdephase/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gravdephase/errors.hpp"
#include "gravdephase/parallel.hpp"

namespace gd {

namespace {

constexpr double kCosGuard = 1e-6;

// omega_k - nu for k = (k0x, k0y, kz), written so that it does not cancel.
double mode_detuning(double kz, const SpectrumParams& p) {
  const double k0_norm = p.k0.norm();
  const double transverse_sq = p.k0.x() * p.k0.x() + p.k0.y() * p.k0.y();
  const double k_norm = std::sqrt(transverse_sq + kz * kz);
  const double k0z = p.k0z();
  return p.constants.c * (kz - k0z) * (kz + k0z) / (k_norm + k0_norm);
}

double mode_frequency(double kz, const SpectrumParams& p) {
  return p.constants.c * std::sqrt(p.k0.x() * p.k0.x() + p.k0.y() * p.k0.y() + kz * kz);
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

void require_positive_a(const SpectrumParams& p) {
  if (!(p.metric.a > 0.0)) {
    throw DomainError("the kernel needs a > 0; use flat_delta_limit for the flat case");
  }
}

}  // namespace

SpectrumParams SpectrumParams::resonant(double theta0, double phi0, double nu, double gamma,
                                        WeakFieldMetric metric, double Z,
                                        PhysicalConstants constants) {
  SpectrumParams p;
  const double k = nu / constants.c;
  p.k0 = k * Vec3(std::sin(theta0) * std::cos(phi0), std::sin(theta0) * std::sin(phi0),
                  std::cos(theta0));
  p.nu = nu;
  p.gamma = gamma;
  p.metric = std::move(metric);
  p.Z = Z;
  p.constants = constants;
  return p;
}

double SpectrumParams::theta0() const { return std::acos(std::clamp(cos_theta0(), -1.0, 1.0)); }

void SpectrumParams::validate() const {
  constants.validate();
  metric.validate();
  if (!(nu > 0.0) || !(gamma > 0.0)) throw DomainError("nu and gamma must be positive");
  if (!(gamma <= kMaxDecayRatio * nu)) {
    throw DomainError("spectrum requires gamma << nu (gamma <= " + std::to_string(kMaxDecayRatio) +
                      " nu)");
  }
  const double expected = nu / constants.c;
  if (!(std::abs(k0.norm() - expected) <= 1e-9 * expected)) {
    throw DomainError("absorbed photon must be resonant: |k0| = nu / c");
  }
  if (!(std::abs(cos_theta0()) > kCosGuard)) {
    throw DomainError("k0 must not be perpendicular to the gravity axis");
  }
}

std::string_view to_string(SpectrumMethod method) {
  switch (method) {
    case SpectrumMethod::analytic:
      return "analytic";
    case SpectrumMethod::quadrature:
      return "quadrature";
    case SpectrumMethod::montecarlo:
      return "montecarlo";
  }
  return "unknown";
}

std::vector<double> AngularSpectrum::probability() const {
  std::vector<double> out;
  out.reserve(amplitude.size());
  for (const auto& amp : amplitude) out.push_back(std::norm(amp));
  return out;
}

void AngularSpectrum::validate() const {
  validate_grid(kz);
  if (amplitude.size() != kz.size()) throw DomainError("amplitude and grid sizes differ");
  if (!stderr_amp.empty() && stderr_amp.size() != kz.size()) {
    throw DomainError("standard-error and grid sizes differ");
  }
}

void validate_grid(std::span<const double> kz_grid) {
  if (kz_grid.empty()) throw DomainError("k_z grid is empty");
  for (std::size_t i = 1; i < kz_grid.size(); ++i) {
    if (!(kz_grid[i] > kz_grid[i - 1])) throw DomainError("k_z grid must be strictly increasing");
  }
}

std::vector<double> kernel_grid(const SpectrumParams& params, double x_min, double x_max,
                                double step) {
  require_positive_a(params);
  if (!(step > 0.0) || !(x_max > x_min)) throw DomainError("invalid kernel grid specification");
  const double width = params.metric.a * params.nu / params.gamma;
  const auto n = static_cast<std::size_t>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_max - step * static_cast<double>(i);
    grid.push_back(params.k0z() - x * width);
  }
  return grid;
}

cdouble g_kernel(double kz, const SpectrumParams& params) {
  require_positive_a(params);
  const double scale = params.metric.a * params.nu;
  const double offset = params.k0z() - kz;
  if (offset < 0.0) return 0.0;
  return cdouble(0.0, -1.0 / scale) * std::exp(-offset * params.gamma / scale);
}

QuadratureResult g_kernel_area(const SpectrumParams& params, double rel_tol) {
  require_positive_a(params);
  return integrate_to([&](double kz) { return g_kernel(kz, params); }, params.k0z(), rel_tol);
}

AngularSpectrum analytic_spectrum(std::span<const double> kz_grid, const SpectrumParams& params) {
  validate_grid(kz_grid);
  AngularSpectrum out;
  out.method = SpectrumMethod::analytic;
  out.a = params.metric.a;
  out.kz.assign(kz_grid.begin(), kz_grid.end());
  for (double kz : kz_grid) out.amplitude.push_back(g_kernel(kz, params));
  return out;
}

double ZWindow::weight(double z) const {
  if (z < z_min || z > z_max) return 0.0;
  if (taper_fraction <= 0.0) return 1.0;
  const double ramp = taper_fraction * 0.5 * length();
  const double edge = std::min(z - z_min, z_max - z);
  if (edge >= ramp) return 1.0;
  const double s = std::sin(0.5 * kPi * edge / ramp);
  return s * s;
}

void ZWindow::validate() const {
  if (!(z_max > z_min)) throw DomainError("window must satisfy z_min < z_max");
  if (!(taper_fraction >= 0.0 && taper_fraction <= 1.0)) {
    throw DomainError("taper fraction must lie in [0, 1]");
  }
}

double window_decay_lengths(const ZWindow& window, const SpectrumParams& params) {
  return window.length() * params.metric.a * params.nu / params.gamma;
}

QuadratureResult z_integral_oracle(double kz, const SpectrumParams& params,
                                   const OracleOptions& options) {
  params.validate();
  options.window.validate();
  const ZWindow& w = options.window;
  params.metric.checked_offset(w.z_min);
  params.metric.checked_offset(w.z_max);
  if (options.min_decay_lengths > 0.0 &&
      !(window_decay_lengths(w, params) >= options.min_decay_lengths)) {
    throw DomainError("integration window covers fewer than " +
                      std::to_string(options.min_decay_lengths) + " decay lengths");
  }

  const double a = params.metric.a;
  const double delta = params.k0z() - kz;
  const double omega = mode_frequency(kz, params);
  const double gradient_freq = options.gradient == GradientFrequency::mode ? omega : params.nu;
  const cdouble base(mode_detuning(kz, params), 0.5 * params.gamma);

  auto integrand = [&](double z) -> cdouble {
    double weight = w.weight(z);
    if (options.volume_weight) weight *= params.metric.volume_density(z);
    const cdouble denom = base + 0.5 * a * gradient_freq * (params.Z - z);
    return weight * std::polar(1.0, delta * z) / denom;
  };

  // Panels resolve both the oscillation period and the resonance width.
  const double length = w.length();
  const double periods = length * std::abs(delta) / (2.0 * kPi);
  const double resonance_width = a > 0.0 ? params.gamma / (a * gradient_freq) : length;
  const double panels = std::ceil(2.0 * periods + 4.0 * length / resonance_width) + 1.0;
  const auto n = static_cast<std::size_t>(std::clamp(panels, 1.0, 200000.0));
  return integrate_panels(integrand, w.z_min, w.z_max, n, options.rel_tol);
}

AngularSpectrum quadrature_spectrum(std::span<const double> kz_grid, const SpectrumParams& params,
                                    const OracleOptions& options, unsigned threads) {
  validate_grid(kz_grid);
  AngularSpectrum out;
  out.method = SpectrumMethod::quadrature;
  out.a = params.metric.a;
  out.kz.assign(kz_grid.begin(), kz_grid.end());
  out.amplitude.resize(kz_grid.size());
  const double length = options.window.length();
  parallel_for(kz_grid.size(), threads, [&](std::size_t i) {
    out.amplitude[i] = z_integral_oracle(kz_grid[i], params, options).value / length;
  });
  return out;
}

AngularSpectrum monte_carlo_spectrum(const Ensemble& ensemble, const TimedDickeState& state,
                                     std::span<const double> kz_grid,
                                     const SpectrumParams& params,
                                     const MonteCarloOptions& options) {
  params.validate();
  validate_grid(kz_grid);
  const std::size_t n = ensemble.size();
  if (n == 0) throw DomainError("Monte Carlo spectrum of an empty ensemble");
  if (state.amplitudes.size() != n) throw DomainError("state and ensemble sizes differ");
  if (options.volume_weight && ensemble.weights.size() != n) {
    throw DomainError("ensemble carries no importance weights");
  }
  for (const auto& atom : ensemble.atoms) params.metric.checked_offset(atom.r.z());

  const std::size_t batches = std::min(options.batches, n);
  const double a = params.metric.a;
  // sqrt(N) c_j turns the state into per-atom phasors; dividing the sum by N
  // makes the result an average over atoms.
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);

  AngularSpectrum out;
  out.method = SpectrumMethod::montecarlo;
  out.a = a;
  out.seed = ensemble.seed;
  out.kz.assign(kz_grid.begin(), kz_grid.end());
  out.amplitude.resize(kz_grid.size());
  if (batches >= 2) out.stderr_amp.resize(kz_grid.size());

  std::vector<cdouble> batch_sum(batches);
  for (std::size_t g = 0; g < kz_grid.size(); ++g) {
    const double kz = kz_grid[g];
    const Vec3 k(params.k0.x(), params.k0.y(), kz);
    const double omega = mode_frequency(kz, params);
    const double detuning = mode_detuning(kz, params);
    std::fill(batch_sum.begin(), batch_sum.end(), cdouble{});
    for (std::size_t j = 0; j < n; ++j) {
      const Atom& atom = ensemble.atoms[j];
      const cdouble denom(detuning + redshift_delta(omega, params.Z - atom.r.z(), a),
                          0.5 * params.gamma);
      cdouble term = sqrt_n * state.amplitudes[j] * std::polar(1.0, -k.dot(atom.r)) / denom;
      if (options.volume_weight) term *= ensemble.weights[j];
      batch_sum[batches > 0 ? (j * batches) / n : 0] += term;
    }
    cdouble total{};
    for (const auto& s : batch_sum) total += s;
    out.amplitude[g] = total * inv_n;
    if (batches >= 2) {
      // Each batch estimates the mean with its own atom count.
      double var = 0.0;
      for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = (b * n + batches - 1) / batches;
        const std::size_t hi = ((b + 1) * n + batches - 1) / batches;
        const cdouble mean_b = batch_sum[b] / static_cast<double>(hi - lo);
        var += std::norm(mean_b - out.amplitude[g]);
      }
      const double nb = static_cast<double>(batches);
      out.stderr_amp[g] = std::sqrt(var / (nb * (nb - 1.0)));
    }
  }
  return out;
}

void normalize_to(AngularSpectrum& spectrum, std::size_t index) {
  if (index >= spectrum.amplitude.size()) throw DomainError("normalization index out of range");
  const cdouble ref = spectrum.amplitude[index];
  if (ref == cdouble{}) throw DomainError("cannot normalize to a zero amplitude");
  for (auto& amp : spectrum.amplitude) amp /= ref;
  for (auto& e : spectrum.stderr_amp) e /= std::abs(ref);
}

ReplicaSpectra monte_carlo_replicas(const ReplicaSpec& spec, std::span<const double> kz_grid,
                                    const SpectrumParams& params,
                                    const MonteCarloOptions& options, unsigned threads,
                                    std::optional<std::size_t> normalize_at) {
  params.validate();
  validate_grid(kz_grid);
  if (spec.replicas == 0) throw DomainError("need at least one replica");
  ReplicaSpectra out;
  out.replicas.resize(spec.replicas);
  parallel_for(spec.replicas, threads, [&](std::size_t r) {
    const Ensemble ensemble = sample_ensemble(spec.ensemble, spec.seed, r, &params.metric);
    const TimedDickeState state =
        spec.curved_state ? curved_timed_dicke(ensemble, params.k0, params.metric, *spec.curved_state)
                          : flat_timed_dicke(ensemble, params.k0);
    AngularSpectrum s = monte_carlo_spectrum(ensemble, state, kz_grid, params, options);
    if (normalize_at) normalize_to(s, *normalize_at);
    out.replicas[r] = std::move(s);
  });

  AngularSpectrum& mean = out.mean;
  mean.method = SpectrumMethod::montecarlo;
  mean.a = params.metric.a;
  mean.seed = spec.seed;
  mean.kz.assign(kz_grid.begin(), kz_grid.end());
  mean.amplitude.assign(kz_grid.size(), cdouble{});
  mean.stderr_amp.assign(kz_grid.size(), 0.0);
  const double nr = static_cast<double>(spec.replicas);
  for (const auto& rep : out.replicas) {
    for (std::size_t g = 0; g < kz_grid.size(); ++g) mean.amplitude[g] += rep.amplitude[g] / nr;
  }
  if (spec.replicas >= 2) {
    for (std::size_t g = 0; g < kz_grid.size(); ++g) {
      double var = 0.0;
      for (const auto& rep : out.replicas) var += std::norm(rep.amplitude[g] - mean.amplitude[g]);
      mean.stderr_amp[g] = std::sqrt(var / (nr * (nr - 1.0)));
    }
  } else {
    mean.stderr_amp = out.replicas.front().stderr_amp;
  }
  return out;
}

double structure_factor(std::span<const Vec3> positions, const Vec3& delta_k) {
  if (positions.empty()) throw DomainError("structure factor of an empty ensemble");
  cdouble sum{};
  for (const auto& r : positions) sum += std::polar(1.0, delta_k.dot(r));
  return std::norm(sum / static_cast<double>(positions.size()));
}

double expected_structure_factor(std::size_t n, const Vec3& box_edges, const Vec3& delta_k) {
  if (n == 0) throw DomainError("structure factor of an empty ensemble");
  const double inv_n = 1.0 / static_cast<double>(n);
  double coherent = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double s = sinc(0.5 * delta_k[i] * box_edges[i]);
    coherent *= s * s;
  }
  return inv_n + (1.0 - inv_n) * coherent;
}

WavevectorSpread wavevector_spread(const SpectrumParams& params) {
  if (!(params.metric.a >= 0.0)) throw DomainError("a must be >= 0");
  const double decay = params.metric.a * params.nu / params.gamma;
  return {decay * params.cos_theta0(), decay};
}

double frequency_spread(const SpectrumParams& params) {
  if (!(params.metric.a >= 0.0)) throw DomainError("a must be >= 0");
  return params.metric.a * params.constants.c * params.nu * params.cos_theta0() / params.gamma;
}

std::vector<DeltaLimitStep> flat_delta_limit(std::span<const double> kz_grid,
                                             const SpectrumParams& params,
                                             std::span<const double> a_values) {
  validate_grid(kz_grid);
  std::vector<DeltaLimitStep> steps;
  for (double a : a_values) {
    SpectrumParams p = params;
    p.metric.a = a;
    DeltaLimitStep step;
    step.a = a;
    step.spectrum = analytic_spectrum(kz_grid, p);
    step.peak = std::abs(g_kernel(p.k0z(), p));
    step.area = g_kernel_area(p).value;

    // Walk down from the cutoff to the first sample below peak / e and
    // interpolate log|G| linearly.
    step.measured_width = std::numeric_limits<double>::quiet_NaN();
    const double target = std::log(step.peak) - 1.0;
    double prev_kz = std::numeric_limits<double>::quiet_NaN();
    double prev_log = 0.0;
    for (std::size_t i = kz_grid.size(); i-- > 0;) {
      const double kz = kz_grid[i];
      if (kz > p.k0z()) continue;
      const double mag = std::abs(step.spectrum.amplitude[i]);
      const double lg = mag > 0.0 ? std::log(mag) : -std::numeric_limits<double>::infinity();
      if (lg <= target) {
        if (std::isnan(prev_kz)) break;
        const double t = (prev_log - target) / (prev_log - lg);
        step.measured_width = p.k0z() - (prev_kz + t * (kz - prev_kz));
        break;
      }
      prev_kz = kz;
      prev_log = lg;
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace gd
