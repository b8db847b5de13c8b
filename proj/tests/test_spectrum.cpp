#include <doctest.h>

#include <cmath>
#include <vector>

#include "gravdephase/emission.hpp"
#include "gravdephase/errors.hpp"
#include "gravdephase/spectrum.hpp"

using namespace gd;

namespace {
SpectrumParams scaled_params(double a, double theta0 = kPi / 3.0) {
  return SpectrumParams::resonant(theta0, 0.0, 1.0, 1e-2, WeakFieldMetric{a, 0.0}, 0.0,
                                  PhysicalConstants::scaled());
}
}  // namespace

TEST_CASE("spectrum parameters") {
  const SpectrumParams p = scaled_params(1e-3);
  CHECK(p.k0.norm() == doctest::Approx(1.0));
  CHECK(p.k0z() == doctest::Approx(0.5));
  CHECK(p.theta0() == doctest::Approx(kPi / 3.0));
  CHECK_NOTHROW(p.validate());
  SpectrumParams off = p;
  off.k0 *= 1.1;
  CHECK_THROWS_AS(off.validate(), DomainError);
  CHECK_THROWS_AS(scaled_params(1e-3, kPi / 2.0).validate(), DomainError);
  SpectrumParams broad = p;
  broad.gamma = 0.1;
  CHECK_THROWS_AS(broad.validate(), DomainError);
}

TEST_CASE("G kernel values") {
  const SpectrumParams p = scaled_params(1e-3);
  CHECK(g_kernel(p.k0z() + 1e-6, p) == cdouble{});
  CHECK(std::abs(g_kernel(p.k0z(), p) - cdouble(0.0, -1000.0)) < 1e-9);
  const double width = 1e-3 / 1e-2;
  CHECK(std::abs(g_kernel(p.k0z() - width, p)) == doctest::Approx(1000.0 / std::exp(1.0)));
  CHECK_THROWS_AS(g_kernel(0.0, scaled_params(0.0)), DomainError);
}

TEST_CASE("G kernel area is -i/Gamma for every a") {
  for (double a : {1e-4, 1e-3, 1e-2}) {
    const QuadratureResult area = g_kernel_area(scaled_params(a));
    CHECK(std::abs(area.value - cdouble(0.0, -100.0)) / 100.0 < 1e-8);
  }
}

TEST_CASE("kernel grid") {
  const SpectrumParams p = scaled_params(1e-3);
  const auto grid = kernel_grid(p, -1.0, 3.0, 0.5);
  REQUIRE(grid.size() == 9);
  CHECK_NOTHROW(validate_grid(grid));
  CHECK(grid.front() == doctest::Approx(0.5 - 0.3));
  CHECK(grid.back() == doctest::Approx(0.6));
  CHECK_THROWS_AS(kernel_grid(p, 3.0, 1.0, 0.5), DomainError);
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(validate_grid(bad), DomainError);
  CHECK_THROWS_AS(validate_grid({}), DomainError);
}

TEST_CASE("analytic spectrum and probability") {
  const SpectrumParams p = scaled_params(1e-3);
  const auto grid = kernel_grid(p, -1.0, 3.0, 0.5);
  const AngularSpectrum s = analytic_spectrum(grid, p);
  CHECK(s.method == SpectrumMethod::analytic);
  CHECK(to_string(s.method) == "analytic");
  const auto prob = s.probability();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(prob[i] == doctest::Approx(std::norm(g_kernel(grid[i], p))));
    if (grid[i] > p.k0z() + 1e-12) CHECK(prob[i] == 0.0);
  }
}

TEST_CASE("z window taper") {
  ZWindow hard{-1.0, 1.0, 0.0};
  CHECK(hard.weight(0.99) == 1.0);
  CHECK(hard.weight(1.01) == 0.0);
  ZWindow soft{0.0, 10.0, 0.5};
  CHECK(soft.weight(0.0) == doctest::Approx(0.0));
  CHECK(soft.weight(1.25) == doctest::Approx(0.5));
  CHECK(soft.weight(5.0) == 1.0);
  CHECK(soft.weight(7.5) == doctest::Approx(1.0));
  ZWindow bad{1.0, 1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("z-integral oracle reduces to a window sinc in the flat limit") {
  const SpectrumParams p = scaled_params(1e-9);
  OracleOptions opt;
  opt.window = {-50.0, 50.0, 0.0};
  for (double dk : {0.0, 0.01, 0.05, 0.13}) {
    const double kz = p.k0z() - dk;
    const double kx = p.k0.x();
    const double omega = std::sqrt(kx * kx + kz * kz);
    const double arg = 0.5 * dk * 100.0;
    const double sinc = dk == 0.0 ? 1.0 : std::sin(arg) / arg;
    const cdouble expected = 100.0 * sinc / cdouble(omega - 1.0, 0.005);
    const cdouble got = z_integral_oracle(kz, p, opt).value;
    CHECK(std::abs(got - expected) <= 1e-5 * std::abs(expected) + 1e-9);
  }
}

TEST_CASE("oracle window guard") {
  const SpectrumParams p = scaled_params(1e-3);
  OracleOptions opt;
  opt.window = {-50.0, 50.0, 0.0};
  opt.min_decay_lengths = 50.0;
  CHECK(window_decay_lengths(opt.window, p) == doctest::Approx(10.0));
  CHECK_THROWS_AS(z_integral_oracle(0.4, p, opt), DomainError);
  opt.window = {-2e3, 2e3, 0.0};
  opt.min_decay_lengths = 0.0;
  CHECK_THROWS_AS(z_integral_oracle(0.4, p, opt), LinearizationError);
}

TEST_CASE("structure factor") {
  EnsembleSpec spec;
  spec.n_atoms = 200;
  spec.box.edges = Vec3::Constant(10.0);
  spec.gamma = 1e-2;
  const Ensemble ens = sample_ensemble(spec, 7);
  std::vector<Vec3> pos;
  for (const auto& a : ens.atoms) pos.push_back(a.r);
  CHECK(structure_factor(pos, Vec3::Zero()) == 1.0);
  const std::vector<Vec3> single{Vec3(0.3, 0.2, 0.1)};
  for (const Vec3 dk : {Vec3(1, 2, 3), Vec3(-7, 0, 0.5)}) {
    CHECK(structure_factor(single, dk) == doctest::Approx(1.0));
  }
  CHECK(expected_structure_factor(1, spec.box.edges, Vec3(3, 1, 2)) == doctest::Approx(1.0));
  CHECK(expected_structure_factor(100, spec.box.edges, Vec3::Zero()) == doctest::Approx(1.0));
  // at a sinc zero only the incoherent 1/N part survives
  CHECK(expected_structure_factor(100, spec.box.edges, Vec3(2 * kPi / 10.0, 0, 0)) ==
        doctest::Approx(0.01));
  CHECK_THROWS_AS(structure_factor({}, Vec3::Zero()), DomainError);
}

TEST_CASE("spread formulas") {
  SpectrumParams p = scaled_params(1e-3, 0.0);
  CHECK(wavevector_spread(p).quoted == doctest::Approx(0.1));
  CHECK(wavevector_spread(p).kernel_decay == doctest::Approx(0.1));
  CHECK(wavevector_spread(scaled_params(0.0, 0.0)).quoted == 0.0);
  SpectrumParams tilted = scaled_params(1e-3, kPi / 2.0);
  CHECK(std::abs(wavevector_spread(tilted).quoted) < 1e-17);
  CHECK(std::abs(frequency_spread(tilted)) < 1e-17);
  CHECK(frequency_spread(scaled_params(0.0, 0.0)) == 0.0);

  const SpectrumParams earth = SpectrumParams::resonant(
      0.0, 0.0, 1e15, 1e8, WeakFieldMetric{2e-16, 0.0}, 0.0, PhysicalConstants::si());
  CHECK(frequency_spread(earth) == doctest::Approx(0.6).epsilon(1e-3));
}

TEST_CASE("delta limit narrows the kernel at constant area") {
  SpectrumParams p = scaled_params(1e-3);
  const auto grid = kernel_grid(p, -2.0, 40.0, 0.05);
  const std::vector<double> as{8e-3, 4e-3, 2e-3, 1e-3};
  const auto steps = flat_delta_limit(grid, p, as);
  REQUIRE(steps.size() == 4);
  for (const auto& s : steps) {
    CHECK(s.measured_width == doctest::Approx(s.a / 1e-2).epsilon(1e-6));
    CHECK(s.peak == doctest::Approx(1.0 / s.a));
    CHECK(std::abs(s.area - cdouble(0, -100.0)) < 1e-6);
  }
  CHECK(steps[3].measured_width < steps[0].measured_width);
}

TEST_CASE("Monte Carlo spectrum") {
  const SpectrumParams p = scaled_params(1e-3);
  const auto grid = kernel_grid(p, 0.5, 4.0, 0.5);
  EnsembleSpec spec;
  spec.n_atoms = 2000;
  spec.box.edges = Vec3(1, 1, 200);
  spec.gamma = 1e-2;
  const Ensemble ens = sample_ensemble(spec, 1);
  const TimedDickeState state = flat_timed_dicke(ens, p.k0);

  SUBCASE("atom-average of the summand") {
    const AngularSpectrum s = monte_carlo_spectrum(ens, state, grid, p);
    REQUIRE(s.stderr_amp.size() == grid.size());
    const double kz = grid[3];
    const Vec3 k(p.k0.x(), p.k0.y(), kz);
    const double omega = std::hypot(k.x(), kz);
    cdouble sum{};
    for (std::size_t j = 0; j < ens.size(); ++j) {
      const double zj = ens.atoms[j].r.z();
      const double w = omega * (1.0 + 0.5 * p.metric.a * (p.Z - zj));
      sum += std::polar(1.0, (p.k0 - k).dot(ens.atoms[j].r)) / cdouble(w - 1.0, 0.005);
    }
    sum /= static_cast<double>(ens.size());
    CHECK(std::abs(s.amplitude[3] - sum) < 1e-9 * std::abs(sum));
    CHECK(s.seed.value() == 1);
  }
  SUBCASE("replicas are reproducible and independent of thread count") {
    ReplicaSpec rs;
    rs.ensemble = spec;
    rs.ensemble.n_atoms = 300;
    rs.replicas = 4;
    rs.seed = 5;
    const auto r1 = monte_carlo_replicas(rs, grid, p, {}, 1, 0);
    const auto r2 = monte_carlo_replicas(rs, grid, p, {}, 3, 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(r1.mean.amplitude[i] == r2.mean.amplitude[i]);
    }
    CHECK(std::abs(r1.mean.amplitude[0] - 1.0) < 1e-15);
    CHECK(r1.mean.stderr_amp[0] < 1e-15);
  }
  SUBCASE("errors") {
    TimedDickeState wrong = state;
    wrong.amplitudes.pop_back();
    CHECK_THROWS_AS(monte_carlo_spectrum(ens, wrong, grid, p), DomainError);
    CHECK_THROWS_AS(monte_carlo_spectrum(ens, state, std::vector<double>{}, p), DomainError);
  }
}

TEST_CASE("normalization") {
  AngularSpectrum s;
  s.kz = {0.0, 1.0};
  s.amplitude = {cdouble(0, 2), cdouble(4, 0)};
  s.stderr_amp = {0.2, 0.4};
  normalize_to(s, 0);
  CHECK(std::abs(s.amplitude[0] - 1.0) < 1e-15);
  CHECK(std::abs(s.amplitude[1] - cdouble(0, -2)) < 1e-15);
  CHECK(s.stderr_amp[1] == doctest::Approx(0.2));
  CHECK_THROWS_AS(normalize_to(s, 5), DomainError);
  s.amplitude[1] = 0.0;
  CHECK_THROWS_AS(normalize_to(s, 1), DomainError);
}
