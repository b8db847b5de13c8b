#include "gravdephase/modes.hpp"

#include <cmath>
#include <string>

#include "gravdephase/errors.hpp"

namespace gd {

FlatBasis flat_polarization_basis(const Vec3& k) {
  const double norm = k.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError("polarization basis needs a nonzero finite wavevector");
  }
  const Vec3 k_hat = k / norm;
  Vec3 f1 = Vec3::UnitZ().cross(k_hat);
  const double f1_norm = f1.norm();
  if (f1_norm > 1e-12) {
    f1 /= f1_norm;
  } else {
    f1 = Vec3::UnitX();
  }
  Vec3 f2 = k_hat.cross(f1);
  f2.normalize();
  return {f1, f2};
}

PerturbedMode::PerturbedMode(ModeIndex index, WeakFieldMetric metric, PhysicalConstants constants,
                             double V0, ModeCorrections corrections, double k_eps)
    : index_(std::move(index)),
      metric_(std::move(metric)),
      constants_(constants),
      V0_(V0),
      corrections_(corrections) {
  metric_.validate();
  constants_.validate();
  if (index_.s != 1 && index_.s != 2) throw DomainError("polarization label must be 1 or 2");
  if (!(V0_ > 0.0)) throw DomainError("quantization volume must be positive");
  k_norm_ = index_.k.norm();
  if (!(k_norm_ > 0.0) || !std::isfinite(k_norm_)) throw DomainError("wavevector must be nonzero");
  if (!(std::abs(index_.k.z()) > k_eps * k_norm_)) {
    throw DomainError("modes with k_z ~ 0 are not supported (|k_z| <= " + std::to_string(k_eps) +
                      " |k|)");
  }
  basis_ = flat_polarization_basis(index_.k);
  omega_ = constants_.c * k_norm_;
  alpha0_ = std::sqrt(constants_.hbar * omega_ / (2.0 * constants_.eps0 * V0_));
  transverse_sq_ = index_.k.x() * index_.k.x() + index_.k.y() * index_.k.y();
}

double PerturbedMode::amplitude(double z) const {
  const double u = offset(z);
  if (!corrections_.amplitude) return alpha0_;
  const double kz = index_.k.z();
  return alpha0_ * (1.0 + u * transverse_sq_ / (4.0 * kz * kz));
}

double PerturbedMode::phase(double t, const Vec3& r) const {
  const double u = offset(r.z());
  const double flat = omega_ * t - index_.k.dot(r);
  if (!corrections_.phase) return flat;
  const double kz = index_.k.z();
  const double dz = r.z() - metric_.z0;
  return flat + u * dz * (transverse_sq_ + 2.0 * kz * kz) / (4.0 * kz);
}

Vec4 PerturbedMode::local_wavevector(double z) const {
  const double u = offset(z);
  const double kz = index_.k.z();
  double kz_tilde = -kz;
  if (corrections_.phase) kz_tilde += u * (transverse_sq_ + 2.0 * kz * kz) / (2.0 * kz);
  return {omega_, -index_.k.x(), -index_.k.y(), kz_tilde};
}

cdouble PerturbedMode::gauss_constant() const {
  const double kz = index_.k.z();
  return {0.0, -transverse_sq_ / (4.0 * kz * kz * kz)};
}

PerturbationComponent PerturbedMode::perturbation_M(int j, double z) const {
  if (j < 1 || j > 3) throw DomainError("axis index j must be 1, 2 or 3");
  offset(z);
  const double kz = index_.k.z();
  const double dz = z - metric_.z0;
  const cdouble common{dz * transverse_sq_ / (4.0 * kz * kz),
                       dz * dz * (transverse_sq_ + 2.0 * kz * kz) / (4.0 * kz)};
  if (j == 3) return {common + gauss_constant(), false};

  const Vec3& f0 = flat_polarization();
  const double f0j = f0[j - 1];
  const double kj = index_.k[j - 1];
  const double tilt = kj * dz * f0.z() / (2.0 * kz);
  if (std::abs(f0j) > 1e-14) return {common + tilt / f0j, false};
  return {f0j * common + tilt, true};
}

CVec3 PerturbedMode::polarization_E(double z) const {
  const double u = offset(z);
  const Vec3& f0 = flat_polarization();
  CVec3 f = f0.cast<cdouble>();
  if (corrections_.polarization) {
    const double kz = index_.k.z();
    f.x() += 0.5 * u * index_.k.x() / kz * f0.z();
    f.y() += 0.5 * u * index_.k.y() / kz * f0.z();
  }
  if (corrections_.gauss_constant) f.z() *= 1.0 + metric_.a * gauss_constant();
  return f;
}

CVec3 PerturbedMode::polarization_H(double z) const {
  const double u = offset(z);
  const Vec4 kt = local_wavevector(z);
  // -k_tilde spatial, i.e. the local propagation vector with lowered index.
  const CVec3 kappa(-kt[1], -kt[2], -kt[3]);
  const CVec3 f = polarization_E(z);
  // eps^{jln} = -sqrt(h) e^{jln}, sqrt(-k^m k_m) = |k| / sqrt(h), h = 1 + a(z - z0).
  const double h = 1.0 + u;
  return (h / k_norm_) * kappa.cross(f);
}

CVec3 PerturbedMode::electric_field(double t, const Vec3& r) const {
  const double theta = phase(t, r);
  return amplitude(r.z()) * std::polar(1.0, theta) * polarization_E(r.z());
}

}  // namespace gd
