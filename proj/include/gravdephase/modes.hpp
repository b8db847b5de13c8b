#pragma once

#include "gravdephase/metric.hpp"
#include "gravdephase/types.hpp"

namespace gd {

/// Wavevector and polarization label of a field eigenmode.
struct ModeIndex {
  Vec3 k = Vec3::UnitZ();  // 1/m
  int s = 1;               // 1 or 2
};

/// Orthonormal flat-space polarizations perpendicular to k.
///
/// Convention: f1 is along z_hat x k, or x_hat when k is parallel to z_hat;
/// f2 = k_hat x f1. Both are exact unit vectors so ports can compare test
/// vectors component by component.
struct FlatBasis {
  Vec3 f1;
  Vec3 f2;
};

FlatBasis flat_polarization_basis(const Vec3& k);

/// Switches for the individual first-order corrections of a mode. All physical
/// corrections are on by default; turning one off is used for ablation studies.
///
/// `gauss_constant` multiplies f3 by (1 + a C3) with C3 = -i(kx^2+ky^2)/(4 kz^3).
/// This term is proportional to the wavelength and is dropped from the
/// geometrical-optics polarization, but it is what makes Gauss's law hold to
/// first order, so the Maxwell residual checks turn it on.
struct ModeCorrections {
  bool amplitude = true;
  bool phase = true;
  bool polarization = true;
  bool gauss_constant = false;
};

/// One perturbation function M_j(z) of the first-order solution. When the flat
/// polarization component f0_j vanishes (j = 1, 2) the ratio f0_3 / f0_j is
/// undefined; `value` then holds the product f0_j M_j and `product_form` is set.
struct PerturbationComponent {
  cdouble value;
  bool product_form = false;
};

/// A plane-wave eigenmode of the Maxwell equations corrected to first order in
/// the metric parameter a: height-dependent amplitude, quadratic phase, local
/// wavevector and tilted E/H polarizations.
///
/// Every height-dependent accessor enforces |a (z - z0)| < 1.
class PerturbedMode {
 public:
  PerturbedMode(ModeIndex index, WeakFieldMetric metric, PhysicalConstants constants,
                double V0, ModeCorrections corrections = {}, double k_eps = 1e-6);

  const ModeIndex& index() const { return index_; }
  const WeakFieldMetric& metric() const { return metric_; }
  const PhysicalConstants& constants() const { return constants_; }
  const ModeCorrections& corrections() const { return corrections_; }
  double volume() const { return V0_; }
  const FlatBasis& flat_basis() const { return basis_; }
  /// f0(k, s).
  const Vec3& flat_polarization() const { return index_.s == 1 ? basis_.f1 : basis_.f2; }

  /// Flat dispersion c |k|.
  double omega() const { return omega_; }
  /// sqrt(hbar omega / (2 eps0 V0)).
  double flat_amplitude() const { return alpha0_; }

  /// alpha_k(z) = alpha0 (1 + a (z - z0)(kx^2 + ky^2) / (4 kz^2)).
  double amplitude(double z) const;

  /// Theta = c|k| t - k.r + a (kx^2 + ky^2 + 2 kz^2)(z - z0)^2 / (4 kz).
  double phase(double t, const Vec3& r) const;

  /// Covariant gradient of the phase, (d_t, d_x, d_y, d_z) Theta.
  Vec4 local_wavevector(double z) const;

  /// M_j(z) for j in {1, 2, 3} including the integration constants
  /// C1 = C2 = 0 and C3.
  PerturbationComponent perturbation_M(int j, double z) const;

  /// C3 = -i (kx^2 + ky^2) / (4 kz^3).
  cdouble gauss_constant() const;

  /// Covariant polarization f_j(z).
  CVec3 polarization_E(double z) const;

  /// Contravariant magnetic polarization p^j(z), geometrical-optics order.
  CVec3 polarization_H(double z) const;

  /// Negative-frequency eigenmode alpha_k(z) f(z) exp(i Theta), per unit
  /// modal amplitude.
  CVec3 electric_field(double t, const Vec3& r) const;

 private:
  double offset(double z) const { return metric_.checked_offset(z); }

  ModeIndex index_;
  WeakFieldMetric metric_;
  PhysicalConstants constants_;
  double V0_;
  ModeCorrections corrections_;
  FlatBasis basis_;
  double k_norm_;
  double omega_;
  double alpha0_;
  double transverse_sq_;  // kx^2 + ky^2
};

}  // namespace gd
