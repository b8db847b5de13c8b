#include "gravdephase/maxwell_verify.hpp"

#include <array>
#include <cmath>

#include "gravdephase/errors.hpp"

namespace gd {

namespace {

using Field = CVec3;

Field field_at(const PerturbedMode& mode, const SpacetimePoint& p, int axis, double shift) {
  SpacetimePoint q = p;
  if (axis == 0) {
    q.t += shift;
  } else {
    q.r[axis - 1] += shift;
  }
  return mode.electric_field(q.t, q.r);
}

Field first_derivative(const PerturbedMode& mode, const SpacetimePoint& p, int axis, double h,
                       int order) {
  if (order == 2) {
    return (field_at(mode, p, axis, h) - field_at(mode, p, axis, -h)) / (2.0 * h);
  }
  return (-field_at(mode, p, axis, 2 * h) + 8.0 * field_at(mode, p, axis, h) -
          8.0 * field_at(mode, p, axis, -h) + field_at(mode, p, axis, -2 * h)) /
         (12.0 * h);
}

Field second_derivative(const PerturbedMode& mode, const SpacetimePoint& p, const Field& center,
                        int axis, double h, int order) {
  if (order == 2) {
    return (field_at(mode, p, axis, h) - 2.0 * center + field_at(mode, p, axis, -h)) / (h * h);
  }
  return (-field_at(mode, p, axis, 2 * h) + 16.0 * field_at(mode, p, axis, h) - 30.0 * center +
          16.0 * field_at(mode, p, axis, -h) - field_at(mode, p, axis, -2 * h)) /
         (12.0 * h * h);
}

struct RawResidual {
  CVec3 wave;
  cdouble gauss;
};

// One stencil evaluation of all four equations with steps scaled by `scale`.
RawResidual evaluate(const PerturbedMode& mode, const SpacetimePoint& p, const StencilSpec& s,
                     double scale) {
  const std::array<double, 4> h{s.h_t * scale, s.h_x * scale, s.h_y * scale, s.h_z * scale};
  const double a = mode.metric().a;
  const double u = mode.metric().checked_offset(p.r.z());
  const double c2 = mode.constants().c * mode.constants().c;

  const Field center = mode.electric_field(p.t, p.r);
  const Field e_tt = second_derivative(mode, p, center, 0, h[0], s.order);
  const Field e_xx = second_derivative(mode, p, center, 1, h[1], s.order);
  const Field e_yy = second_derivative(mode, p, center, 2, h[2], s.order);
  const Field e_zz = second_derivative(mode, p, center, 3, h[3], s.order);
  const Field e_x = first_derivative(mode, p, 1, h[1], s.order);
  const Field e_y = first_derivative(mode, p, 2, h[2], s.order);
  const Field e_z = first_derivative(mode, p, 3, h[3], s.order);

  RawResidual out;
  out.wave.x() = (1.0 - u) * e_tt.x() / c2 - e_xx.x() - e_yy.x() - (1.0 + u) * e_zz.x() -
                 a * e_z.x() + a * e_x.z();
  out.wave.y() = (1.0 - u) * e_tt.y() / c2 - e_xx.y() - e_yy.y() - (1.0 + u) * e_zz.y() -
                 a * e_z.y() + a * e_y.z();
  out.wave.z() = e_tt.z() / c2 - (1.0 + u) * (e_xx.z() + e_yy.z()) - (1.0 + 2.0 * u) * e_zz.z() -
                 a * e_z.z();
  out.gauss = e_x.x() + e_y.y() + (1.0 + u) * e_z.z();
  return out;
}

struct Extrapolated {
  RawResidual value;
  double wave_correction;
  double gauss_correction;
};

Extrapolated richardson(const PerturbedMode& mode, const SpacetimePoint& p,
                        const StencilSpec& s) {
  s.validate();
  const RawResidual coarse = evaluate(mode, p, s, 1.0);
  const RawResidual fine = evaluate(mode, p, s, 0.5);
  const double denom = std::pow(2.0, s.order) - 1.0;
  const CVec3 wave_corr = (fine.wave - coarse.wave) / denom;
  const cdouble gauss_corr = (fine.gauss - coarse.gauss) / denom;
  return {{fine.wave + wave_corr, fine.gauss + gauss_corr}, wave_corr.norm(), std::abs(gauss_corr)};
}

}  // namespace

void StencilSpec::validate() const {
  if (!(h_t > 0.0 && h_x > 0.0 && h_y > 0.0 && h_z > 0.0)) {
    throw DomainError("stencil steps must be positive");
  }
  if (order != 2 && order != 4) throw DomainError("stencil order must be 2 or 4");
}

ResidualReport wave_residual(const PerturbedMode& mode, const SpacetimePoint& point,
                             const StencilSpec& stencil) {
  const Extrapolated ex = richardson(mode, point, stencil);
  ResidualReport report;
  report.point = point;
  report.residual_vector = ex.value.wave;
  report.gauss_residual = ex.value.gauss;
  report.discretization_estimate = ex.wave_correction;
  report.gauss_discretization_estimate = ex.gauss_correction;
  report.inconclusive = ex.wave_correction > ex.value.wave.norm() ||
                        ex.gauss_correction > std::abs(ex.value.gauss);
  return report;
}

GaussResidual gauss_residual(const PerturbedMode& mode, const SpacetimePoint& point,
                             const StencilSpec& stencil) {
  const Extrapolated ex = richardson(mode, point, stencil);
  return {ex.value.gauss, ex.gauss_correction, ex.gauss_correction > std::abs(ex.value.gauss)};
}

Transversality transversality_check(const PerturbedMode& mode, double z) {
  const CVec3 f = mode.polarization_E(z);
  const CVec3 p = mode.polarization_H(z);
  const Vec4 kt = mode.local_wavevector(z);
  const CVec3 k_lower(kt[1], kt[2], kt[3]);
  // Raise with the positive-definite spatial metric diag(1, 1, 1 - a(z - z0)).
  const CVec3 k_upper(k_lower.x(), k_lower.y(), k_lower.z() / mode.metric().gamma_zz(z));
  Transversality out;
  const auto contract = [](const CVec3& lhs, const CVec3& rhs) {
    return std::abs((lhs.array() * rhs.array()).sum());
  };
  out.p_dot_f = contract(p, f);
  out.k_dot_f = contract(k_upper, f);
  out.p_dot_k = contract(p, k_lower);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("slope fit needs at least two paired samples");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive samples");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace gd
