#pragma once

#include <cstdint>
#include <vector>

#include "gravdephase/metric.hpp"
#include "gravdephase/modes.hpp"
#include "gravdephase/types.hpp"

namespace gd {

/// Largest accepted Gamma / nu. The emission formulas assume Gamma << nu.
inline constexpr double kMaxDecayRatio = 1e-2;

/// Stationary two-level atom.
struct Atom {
  Vec3 r = Vec3::Zero();  // m
  double nu = 1.0;        // transition angular frequency, 1/s
  double gamma = 1e-3;    // spontaneous decay rate, 1/s
  Vec3 d = Vec3::UnitX(); // dipole moment, C m

  void validate() const;
};

/// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 edges = Vec3::Ones();

  double volume() const { return edges.prod(); }
  bool contains(const Vec3& r) const;
  void validate() const;
};

/// Identical atoms placed uniformly in a box. `weights` holds the proper-volume
/// density sqrt(-gamma) at each atom (all ones in flat space); spectra apply it
/// as an importance weight only when asked to.
struct Ensemble {
  std::vector<Atom> atoms;
  Box box;
  std::uint64_t seed = 0;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
};

struct EnsembleSpec {
  std::size_t n_atoms = 1;
  Box box;
  double nu = 1.0;
  double gamma = 1e-3;
  Vec3 dipole = Vec3::UnitX();
};

/// Uniform positions from the counter-based stream (seed, stream). With a
/// metric, the importance weights are filled with sqrt(1 - a (z - z0)).
Ensemble sample_ensemble(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t stream = 0,
                         const WeakFieldMetric* metric = nullptr);

/// Unit-norm single-excitation amplitudes c_j over the atoms of an ensemble.
struct TimedDickeState {
  std::vector<cdouble> amplitudes;
  Vec3 k0 = Vec3::Zero();
  /// max_j |a F(z_j - z0)|, zero for the flat state.
  double max_linear_correction = 0.0;

  double norm() const;
  bool linearization_warning() const { return max_linear_correction >= 0.1; }
};

/// Coefficients of F(z) = z beta + i z^2 gamma_coef. Their dependence on k0 and
/// on the dipole is not known in closed form, so they are inputs.
struct FCorrectionParams {
  double beta = 0.0;
  double gamma_coef = 0.0;
};

/// v_k(r) = -d . E_k(t = 0, r) / hbar, using the mode's own metric (flat when a = 0).
cdouble coupling_v(const PerturbedMode& mode, const Atom& atom);

/// c_j = exp(i k0 . r_j) / sqrt(N).
TimedDickeState flat_timed_dicke(const Ensemble& ensemble, const Vec3& k0);

/// c_j proportional to exp(i k0 . r_j)(1 + a F(z_j - z0)), renormalized.
TimedDickeState curved_timed_dicke(const Ensemble& ensemble, const Vec3& k0,
                                   const WeakFieldMetric& metric, const FCorrectionParams& f);

/// Excited-state amplitude exp(-Gamma t / 2).
double single_atom_survival(double t, double gamma);

/// Asymptotic photon amplitude in mode k' seen from a lab at height z_lab:
///   v (1 - (a/2)(z_at - z_lab)) / (omega[Z - z_at] - nu - i Gamma/2).
cdouble modal_amplitude_lab(cdouble v, double omega, const Atom& atom, double Z, double z_lab,
                            const WeakFieldMetric& metric);

cdouble modal_amplitude_lab(const PerturbedMode& mode_kprime, const Atom& atom, double Z,
                            double z_lab, const WeakFieldMetric& metric);

/// Same amplitude from the non-local Hamiltonian: the atom keeps the lab clock
/// and is redshifted instead,
///   v / (omega[Z - z_lab] - nu[z_at - z_lab] - (i/2) Gamma[z_at - z_lab]).
/// Agrees with modal_amplitude_lab to first order in a.
cdouble modal_amplitude_nonlocal(cdouble v, double omega, const Atom& atom, double Z,
                                 double z_lab, const WeakFieldMetric& metric);

}  // namespace gd
