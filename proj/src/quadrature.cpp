#include "gravdephase/quadrature.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gravdephase/errors.hpp"

namespace gd {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 25;

void check(const QuadratureResult& r, double rel_tol) {
  const double allowed = rel_tol * r.l1 + std::numeric_limits<double>::min();
  if (!std::isfinite(r.error) || !std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()) ||
      r.error > allowed) {
    throw ConvergenceError("quadrature did not converge: error estimate " +
                           std::to_string(r.error) + " exceeds " + std::to_string(allowed));
  }
}

}  // namespace

QuadratureResult integrate_panels(const ComplexIntegrand& f, double lo, double hi,
                                  std::size_t panels, double rel_tol) {
  if (!(hi > lo)) throw DomainError("integration range must satisfy lo < hi");
  if (panels == 0) panels = 1;
  const double width = (hi - lo) / static_cast<double>(panels);
  QuadratureResult total;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = lo + width * static_cast<double>(i);
    const double b = (i + 1 == panels) ? hi : a + width;
    double err = 0.0;
    double l1 = 0.0;
    total.value += Rule::integrate(f, a, b, kMaxDepth, rel_tol, &err, &l1);
    total.error += err;
    total.l1 += l1;
  }
  check(total, rel_tol);
  return total;
}

QuadratureResult integrate_to(const ComplexIntegrand& f, double upper, double rel_tol) {
  QuadratureResult r;
  r.value = Rule::integrate(f, -std::numeric_limits<double>::infinity(), upper, kMaxDepth, rel_tol,
                            &r.error, &r.l1);
  check(r, rel_tol);
  return r;
}

}  // namespace gd
