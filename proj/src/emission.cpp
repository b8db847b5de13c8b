#include "gravdephase/emission.hpp"

#include <cmath>
#include <string>

#include "gravdephase/errors.hpp"
#include "gravdephase/rng.hpp"

namespace gd {

void Atom::validate() const {
  if (!(gamma > 0.0)) throw DomainError("decay rate must be positive");
  if (!(nu > 0.0)) throw DomainError("transition frequency must be positive");
  if (!(gamma <= kMaxDecayRatio * nu)) {
    throw DomainError("decay rate must satisfy gamma <= " + std::to_string(kMaxDecayRatio) +
                      " nu");
  }
}

bool Box::contains(const Vec3& r) const {
  return ((r - center).cwiseAbs().array() <= 0.5 * edges.array()).all();
}

void Box::validate() const {
  if (!(edges.array() > 0.0).all()) throw DomainError("box edges must be positive");
}

Ensemble sample_ensemble(const EnsembleSpec& spec, std::uint64_t seed, std::uint64_t stream,
                         const WeakFieldMetric* metric) {
  if (spec.n_atoms == 0) throw DomainError("an ensemble needs at least one atom");
  spec.box.validate();
  Atom prototype;
  prototype.nu = spec.nu;
  prototype.gamma = spec.gamma;
  prototype.d = spec.dipole;
  prototype.validate();

  Ensemble out;
  out.box = spec.box;
  out.seed = seed;
  out.atoms.reserve(spec.n_atoms);
  out.weights.reserve(spec.n_atoms);
  CounterRng rng(seed, stream);
  const Vec3 lo = spec.box.center - 0.5 * spec.box.edges;
  for (std::size_t j = 0; j < spec.n_atoms; ++j) {
    Atom atom = prototype;
    for (int axis = 0; axis < 3; ++axis) {
      atom.r[axis] = lo[axis] + spec.box.edges[axis] * rng.uniform01();
    }
    out.weights.push_back(metric ? metric->volume_density(atom.r.z()) : 1.0);
    out.atoms.push_back(atom);
  }
  return out;
}

double TimedDickeState::norm() const {
  double s = 0.0;
  for (const auto& c : amplitudes) s += std::norm(c);
  return std::sqrt(s);
}

cdouble coupling_v(const PerturbedMode& mode, const Atom& atom) {
  const CVec3 e = mode.electric_field(0.0, atom.r);
  const cdouble projection = (atom.d.cast<cdouble>().array() * e.array()).sum();
  return -projection / mode.constants().hbar;
}

TimedDickeState flat_timed_dicke(const Ensemble& ensemble, const Vec3& k0) {
  if (ensemble.atoms.empty()) throw DomainError("timed Dicke state of an empty ensemble");
  TimedDickeState state;
  state.k0 = k0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(ensemble.size()));
  state.amplitudes.reserve(ensemble.size());
  for (const auto& atom : ensemble.atoms) {
    state.amplitudes.push_back(std::polar(scale, k0.dot(atom.r)));
  }
  return state;
}

TimedDickeState curved_timed_dicke(const Ensemble& ensemble, const Vec3& k0,
                                   const WeakFieldMetric& metric, const FCorrectionParams& f) {
  if (ensemble.atoms.empty()) throw DomainError("timed Dicke state of an empty ensemble");
  metric.validate();
  TimedDickeState state;
  state.k0 = k0;
  state.amplitudes.reserve(ensemble.size());
  double norm_sq = 0.0;
  for (const auto& atom : ensemble.atoms) {
    metric.checked_offset(atom.r.z());
    const double dz = atom.r.z() - metric.z0;
    const cdouble correction = metric.a * cdouble(dz * f.beta, dz * dz * f.gamma_coef);
    state.max_linear_correction = std::max(state.max_linear_correction, std::abs(correction));
    const cdouble c = std::polar(1.0, k0.dot(atom.r)) * (1.0 + correction);
    norm_sq += std::norm(c);
    state.amplitudes.push_back(c);
  }
  const double scale = 1.0 / std::sqrt(norm_sq);
  for (auto& c : state.amplitudes) c *= scale;
  return state;
}

double single_atom_survival(double t, double gamma) {
  if (!(t >= 0.0)) throw DomainError("survival amplitude needs t >= 0");
  return std::exp(-0.5 * gamma * t);
}

cdouble modal_amplitude_lab(cdouble v, double omega, const Atom& atom, double Z, double z_lab,
                            const WeakFieldMetric& metric) {
  atom.validate();
  metric.checked_offset(atom.r.z());
  const double a = metric.a;
  const double z_at = atom.r.z();
  const double detuning = (omega - atom.nu) + redshift_delta(omega, Z - z_at, a);
  const double lab_factor = 1.0 - 0.5 * a * (z_at - z_lab);
  return v * lab_factor / cdouble(detuning, -0.5 * atom.gamma);
}

cdouble modal_amplitude_lab(const PerturbedMode& mode_kprime, const Atom& atom, double Z,
                            double z_lab, const WeakFieldMetric& metric) {
  return modal_amplitude_lab(coupling_v(mode_kprime, atom), mode_kprime.omega(), atom, Z, z_lab,
                             metric);
}

cdouble modal_amplitude_nonlocal(cdouble v, double omega, const Atom& atom, double Z,
                                 double z_lab, const WeakFieldMetric& metric) {
  atom.validate();
  metric.checked_offset(atom.r.z());
  const double a = metric.a;
  const double shift = atom.r.z() - z_lab;
  const double detuning = (omega - atom.nu) + redshift_delta(omega, Z - z_lab, a) -
                          redshift_delta(atom.nu, shift, a);
  return v / cdouble(detuning, -0.5 * redshift(atom.gamma, shift, a));
}

}  // namespace gd
