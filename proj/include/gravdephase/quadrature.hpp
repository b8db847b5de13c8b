#pragma once

#include <cstddef>
#include <functional>

#include "gravdephase/types.hpp"

namespace gd {

struct QuadratureResult {
  cdouble value = 0.0;
  double error = 0.0;   // estimated absolute error
  double l1 = 0.0;      // integral of |f|
};

using ComplexIntegrand = std::function<cdouble(double)>;

/// Adaptive Gauss-Kronrod over [lo, hi], split into `panels` equal
/// sub-intervals so oscillatory integrands see a bounded number of periods per
/// panel. Throws ConvergenceError when the summed error estimate exceeds
/// rel_tol times the L1 norm of the integrand.
QuadratureResult integrate_panels(const ComplexIntegrand& f, double lo, double hi,
                                  std::size_t panels, double rel_tol);

/// Integral over (-infinity, upper].
QuadratureResult integrate_to(const ComplexIntegrand& f, double upper, double rel_tol);

}  // namespace gd
