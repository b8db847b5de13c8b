#include "gravdephase/metric.hpp"

#include <cmath>
#include <string>

#include "gravdephase/errors.hpp"

namespace gd {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("constant '") + name + "' must be positive and finite");
  }
}

}  // namespace

void PhysicalConstants::validate() const {
  require_positive(c, "c");
  require_positive(hbar, "hbar");
  require_positive(eps0, "eps0");
  require_positive(G_newton, "G_newton");
}

void WeakFieldMetric::validate() const {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw DomainError("metric parameter a must be finite and >= 0");
  }
  if (!std::isfinite(z0)) throw DomainError("reference height z0 must be finite");
  if (r_s && (!(*r_s >= 0.0) || !std::isfinite(*r_s))) {
    throw DomainError("Schwarzschild radius must be finite and >= 0");
  }
}

double WeakFieldMetric::checked_offset(double z) const {
  const double u = a * (z - z0);
  if (!(std::abs(u) < 1.0)) {
    throw LinearizationError("linearized metric violated: |a (z - z0)| = " +
                             std::to_string(std::abs(u)) + " >= 1");
  }
  return u;
}

void WeakFieldMetric::check_height(double z) const {
  if (r_s && !(z > 100.0 * *r_s)) {
    throw DomainError("height " + std::to_string(z) +
                      " m is not far outside the Schwarzschild radius (need z > 100 r_s)");
  }
}

double WeakFieldMetric::volume_density(double z) const {
  return std::sqrt(1.0 - checked_offset(z));
}

double surface_param_a(double g, const PhysicalConstants& constants) {
  if (!(g >= 0.0)) throw DomainError("free-fall acceleration must be >= 0");
  constants.validate();
  return 2.0 * g / (constants.c * constants.c);
}

double h_factor(double z, double r_s) {
  if (!(z > 0.0)) throw DomainError("h(z) requires z > 0");
  return 1.0 - r_s / z;
}

double redshift(double x, double z, double a) { return x * (1.0 + 0.5 * a * z); }

double redshift_delta(double x, double z, double a) { return 0.5 * x * a * z; }

double quantization_volume(double L, double Z, const WeakFieldMetric& metric) {
  if (!(L > 0.0)) throw DomainError("box edge must be positive");
  const double u = metric.checked_offset(Z);
  return L * L * L * (1.0 - 0.5 * u);
}

double momentum_measure_factor(double Z, const WeakFieldMetric& metric) {
  return 1.0 + 0.5 * metric.checked_offset(Z);
}

double proper_time_shift(double t, double z_at, double z, double a) {
  return t * (1.0 + 0.5 * a * (z_at - z));
}

}  // namespace gd
