#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gravdephase/emission.hpp"
#include "gravdephase/metric.hpp"
#include "gravdephase/quadrature.hpp"
#include "gravdephase/types.hpp"

namespace gd {

/// Geometry and atomic parameters of the emission problem. The absorbed photon
/// is resonant, |k0| = nu / c, and nu is an angular frequency.
struct SpectrumParams {
  Vec3 k0 = Vec3::UnitZ();
  double nu = 1.0;
  double gamma = 1e-2;
  WeakFieldMetric metric;
  double Z = 0.0;  // height at which the mode set is defined
  PhysicalConstants constants = PhysicalConstants::scaled();

  /// k0 of length nu / c pointing at polar angle theta0 and azimuth phi0.
  static SpectrumParams resonant(double theta0, double phi0, double nu, double gamma,
                                 WeakFieldMetric metric, double Z, PhysicalConstants constants);

  double k0z() const { return k0.z(); }
  double cos_theta0() const { return k0.z() / k0.norm(); }
  double theta0() const;

  void validate() const;
};

enum class SpectrumMethod { analytic, quadrature, montecarlo };

std::string_view to_string(SpectrumMethod method);

/// Emitted-photon amplitude sampled on a strictly increasing k_z grid.
struct AngularSpectrum {
  std::vector<double> kz;
  std::vector<cdouble> amplitude;
  SpectrumMethod method = SpectrumMethod::analytic;
  /// Standard error of each amplitude (Monte Carlo only).
  std::vector<double> stderr_amp;
  std::optional<std::uint64_t> seed;
  double a = 0.0;

  std::vector<double> probability() const;
  void validate() const;
};

/// Checks that a grid is nonempty and strictly increasing.
void validate_grid(std::span<const double> kz_grid);

/// Uniform grid k0z - x * (a nu / Gamma) for x = x_max down to x_min, returned
/// in increasing k_z order.
std::vector<double> kernel_grid(const SpectrumParams& params, double x_min, double x_max,
                                double step);

/// G(k_z) = (-i / (a nu)) exp(-(k0z - k_z) Gamma / (a nu)) H(k0z - k_z), H(0) = 1.
cdouble g_kernel(double kz, const SpectrumParams& params);

/// Integral of g_kernel over (-infinity, k0z] by adaptive quadrature. The
/// exact value is -i / Gamma for every a > 0.
QuadratureResult g_kernel_area(const SpectrumParams& params, double rel_tol = 1e-12);

AngularSpectrum analytic_spectrum(std::span<const double> kz_grid, const SpectrumParams& params);

/// Integration window in z. A positive taper fraction rolls the window off
/// with a sin^2 ramp over that fraction of each half-width.
struct ZWindow {
  double z_min = -1.0;
  double z_max = 1.0;
  double taper_fraction = 0.0;

  double length() const { return z_max - z_min; }
  double weight(double z) const;
  void validate() const;
};

/// Frequency multiplying the height gradient (a/2) omega (Z - z) in the
/// resonance denominator. `mode` keeps omega_k exactly as written; `resonant`
/// substitutes omega_k = nu there, which is the approximation under which the
/// closed-form kernel holds.
enum class GradientFrequency { mode, resonant };

struct OracleOptions {
  ZWindow window;
  double rel_tol = 1e-11;
  GradientFrequency gradient = GradientFrequency::mode;
  bool volume_weight = false;
  /// Reject windows shorter than this many decay lengths Gamma / (a nu).
  double min_decay_lengths = 0.0;
};

/// Number of spatial decay lengths Gamma / (a nu) covered by a window.
double window_decay_lengths(const ZWindow& window, const SpectrumParams& params);

/// Integral over the window of
///   exp(i (k0z - k_z) z) / ((omega_k - nu + i Gamma/2) + (a/2) omega (Z - z))
/// with k_x, k_y pinned to those of k0. The overall constant and phase that the
/// closed-form kernel drops are not applied.
QuadratureResult z_integral_oracle(double kz, const SpectrumParams& params,
                                   const OracleOptions& options);

/// Oracle on a grid, divided by the window length so that it is directly
/// comparable with a Monte Carlo average over atoms spread through the window.
AngularSpectrum quadrature_spectrum(std::span<const double> kz_grid, const SpectrumParams& params,
                                    const OracleOptions& options, unsigned threads = 1);

struct MonteCarloOptions {
  std::size_t batches = 20;
  bool volume_weight = false;
};

/// Emitted amplitude (1/sqrt(N)) sum_j sqrt(N) c_j exp(-i k.r_j) / (omega_k[Z - z_j] - nu + i Gamma/2)
/// scaled to an average over atoms, with k_x, k_y pinned to k0's. Standard
/// errors come from contiguous batches of atoms.
AngularSpectrum monte_carlo_spectrum(const Ensemble& ensemble, const TimedDickeState& state,
                                     std::span<const double> kz_grid,
                                     const SpectrumParams& params,
                                     const MonteCarloOptions& options = {});

struct ReplicaSpec {
  EnsembleSpec ensemble;
  std::size_t replicas = 20;
  std::uint64_t seed = 0;
  /// Use the curved timed Dicke state with these F coefficients instead of the flat one.
  std::optional<FCorrectionParams> curved_state;
};

struct ReplicaSpectra {
  AngularSpectrum mean;  // mean over replicas with the replica standard error
  std::vector<AngularSpectrum> replicas;
};

/// Independent ensembles drawn from streams 0..R-1 of `seed`. With
/// `normalize_at`, every replica is divided by its own amplitude at that grid
/// index before averaging. Output is identical for any thread count.
ReplicaSpectra monte_carlo_replicas(const ReplicaSpec& spec, std::span<const double> kz_grid,
                                    const SpectrumParams& params,
                                    const MonteCarloOptions& options, unsigned threads,
                                    std::optional<std::size_t> normalize_at = std::nullopt);

/// Divides every amplitude (and standard error) by the amplitude at `index`.
void normalize_to(AngularSpectrum& spectrum, std::size_t index);

/// |N^-1 sum_j exp(i dk . r_j)|^2.
double structure_factor(std::span<const Vec3> positions, const Vec3& delta_k);

/// Ensemble expectation of structure_factor for N atoms uniform in a box:
/// 1/N + (1 - 1/N) prod_i sinc^2(dk_i L_i / 2).
double expected_structure_factor(std::size_t n, const Vec3& box_edges, const Vec3& delta_k);

/// Both readings of the angular spread.
struct WavevectorSpread {
  double quoted = 0.0;         // (a nu / Gamma) cos(theta0)
  double kernel_decay = 0.0;   // a nu / Gamma, the e-folding scale of |G| in k_z
};

WavevectorSpread wavevector_spread(const SpectrumParams& params);

/// delta omega = a c nu cos(theta0) / Gamma.
double frequency_spread(const SpectrumParams& params);

struct DeltaLimitStep {
  double a = 0.0;
  AngularSpectrum spectrum;
  double peak = 0.0;            // |G(k0z)|
  double measured_width = 0.0;  // 1/e half-width read off the grid
  cdouble area;                 // quadrature of G over k_z
};

/// Kernel on a fixed grid for each a in `a_values`, showing the approach to a
/// delta function: width proportional to a, peak proportional to 1/a, constant area.
std::vector<DeltaLimitStep> flat_delta_limit(std::span<const double> kz_grid,
                                             const SpectrumParams& params,
                                             std::span<const double> a_values);

}  // namespace gd
