#pragma once

#include <span>
#include <vector>

#include "gravdephase/modes.hpp"

namespace gd {

/// Central-difference steps for the residual evaluation.
struct StencilSpec {
  double h_t = 0.05;
  double h_x = 0.05;
  double h_y = 0.05;
  double h_z = 0.05;
  int order = 4;  // 2 or 4

  void validate() const;
};

struct SpacetimePoint {
  double t = 0.0;
  Vec3 r = Vec3::Zero();
};

/// Left-minus-right sides of the three linearized wave equations and of
/// Gauss's law at one point.
///
/// Each derivative is evaluated with steps h and h/2; the reported residuals
/// are the Richardson-extrapolated values, and the discretization estimates
/// are the magnitudes of the Richardson corrections that were subtracted.
struct ResidualReport {
  SpacetimePoint point;
  CVec3 residual_vector = CVec3::Zero();
  cdouble gauss_residual = 0.0;
  double discretization_estimate = 0.0;
  double gauss_discretization_estimate = 0.0;
  /// Set when a discretization estimate exceeds the residual it belongs to;
  /// the stencil cannot resolve the residual then.
  bool inconclusive = false;
};

ResidualReport wave_residual(const PerturbedMode& mode, const SpacetimePoint& point,
                             const StencilSpec& stencil);

struct GaussResidual {
  cdouble value = 0.0;
  double discretization_estimate = 0.0;
  bool inconclusive = false;
};

/// d_x E_x + d_y E_y + (1 + a(z - z0)) d_z E_z.
GaussResidual gauss_residual(const PerturbedMode& mode, const SpacetimePoint& point,
                             const StencilSpec& stencil);

/// Magnitudes of the spatial contractions p^i f_i, k^i f_i and p^i k_i, the
/// second one raised with the spatial metric.
struct Transversality {
  double p_dot_f = 0.0;
  double k_dot_f = 0.0;
  double p_dot_k = 0.0;
};

Transversality transversality_check(const PerturbedMode& mode, double z);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gd
