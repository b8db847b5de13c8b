#pragma once

#include <optional>

namespace gd {

/// Physical constants in SI units. Every field may be overridden, which is how
/// the dimensionless test regime (c = hbar = eps0 = 1) is expressed.
struct PhysicalConstants {
  double c = 299792458.0;             // m/s
  double hbar = 1.054571817e-34;      // J s
  double eps0 = 8.8541878128e-12;     // F/m
  double G_newton = 6.67430e-11;      // m^3 / (kg s^2)

  static PhysicalConstants si() { return {}; }
  static PhysicalConstants scaled() { return {1.0, 1.0, 1.0, 1.0}; }

  /// Throws DomainError unless all constants are strictly positive and finite.
  void validate() const;
};

/// Linearized Schwarzschild background
///   ds^2 = (1 + a(z - z0)) c^2 dt^2 - (dx^2 + dy^2 + (1 - a(z - z0)) dz^2).
struct WeakFieldMetric {
  double a = 0.0;                 // 1/m, equals 2 g / c^2
  double z0 = 0.0;                // m
  std::optional<double> r_s;      // m, only used by the h(z) diagnostics

  void validate() const;

  /// a * (z - z0); throws LinearizationError when its magnitude reaches 1.
  double checked_offset(double z) const;

  /// Rejects heights that do not satisfy z > 100 r_s (no-op without r_s).
  void check_height(double z) const;

  /// Spatial metric factor gamma_zz = 1 - a(z - z0).
  double gamma_zz(double z) const { return 1.0 - a * (z - z0); }

  /// sqrt(-gamma), the proper-volume density relative to coordinate volume.
  double volume_density(double z) const;
};

/// a = 2 g / c^2.
double surface_param_a(double g, const PhysicalConstants& constants = {});

/// h(z) = 1 - r_s / z.
double h_factor(double z, double r_s);

/// x (1 + a z / 2). Applied alike to mode frequencies, the atomic transition
/// frequency and the decay rate.
double redshift(double x, double z, double a);

/// x [z] - x = x a z / 2, evaluated without forming the difference.
double redshift_delta(double x, double z, double a);

/// L^3 (1 - (a/2)(Z - z0)).
double quantization_volume(double L, double Z, const WeakFieldMetric& metric);

/// 1 + (a/2)(Z - z0), the prefactor of V0/(2 pi)^3 in the mode-sum measure.
double momentum_measure_factor(double Z, const WeakFieldMetric& metric);

/// Converts a time interval measured at height z_at to the clock at height z.
double proper_time_shift(double t, double z_at, double z, double a);

}  // namespace gd
