#include <doctest.h>

#include <cmath>

#include "gravdephase/errors.hpp"
#include "gravdephase/metric.hpp"

using namespace gd;

TEST_CASE("surface parameter a = 2g/c^2") {
  CHECK(surface_param_a(9.81, PhysicalConstants{2.998e8}) == doctest::Approx(2.18e-16).epsilon(1e-2));
  CHECK(surface_param_a(0.0) == 0.0);
  const PhysicalConstants scaled = PhysicalConstants::scaled();
  CHECK(surface_param_a(0.5, scaled) == doctest::Approx(1.0));
  CHECK_THROWS_AS(surface_param_a(-1.0), DomainError);
}

TEST_CASE("h factor") {
  CHECK(1.0 - h_factor(6.37e6, 1e-2) == doctest::Approx(1.5699e-9).epsilon(1e-4));
  CHECK(h_factor(2.0, 1.0) == 0.5);
  CHECK(h_factor(1e300, 1.0) == 1.0);
  CHECK_THROWS_AS(h_factor(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(h_factor(-3.0, 1.0), DomainError);
}

TEST_CASE("redshift keeps the small shift accurate") {
  CHECK(redshift(7.0, 0.0, 0.3) == 7.0);
  CHECK(redshift(7.0, 12.0, 0.0) == 7.0);
  CHECK(redshift(1e15, 1e4, 2e-16) == doctest::Approx(1e15 * (1.0 + 1e-12)).epsilon(1e-16));
  // the shift itself is computed directly, without subtracting two large numbers
  CHECK(redshift_delta(1e15, 1e4, 2e-16) == doctest::Approx(1e3).epsilon(1e-14));
}

TEST_CASE("quantization volume and momentum measure") {
  WeakFieldMetric flat;
  CHECK(quantization_volume(2.0, 5.0, flat) == 8.0);
  WeakFieldMetric m{0.1, 3.0};
  CHECK(quantization_volume(2.0, 3.0, m) == 8.0);
  WeakFieldMetric unit{0.1, 0.0};
  CHECK(quantization_volume(1.0, 1.0, unit) == doctest::Approx(0.95));
  CHECK(momentum_measure_factor(3.0, m) == 1.0);
  CHECK(momentum_measure_factor(7.0, flat) == 1.0);
  CHECK(momentum_measure_factor(1.0, unit) == doctest::Approx(1.05));
  CHECK_THROWS_AS(quantization_volume(1.0, 10.0, unit), LinearizationError);
  CHECK_THROWS_AS(quantization_volume(1.0, -10.0, unit), LinearizationError);
}

TEST_CASE("proper time shift") {
  CHECK(proper_time_shift(3.0, 2.0, 2.0, 0.5) == 3.0);
  CHECK(proper_time_shift(3.0, 2.0, 9.0, 0.0) == 3.0);
  CHECK(proper_time_shift(2.0, 1.0, 0.0, 0.1) == doctest::Approx(2.1));
}

TEST_CASE("metric validation and guards") {
  WeakFieldMetric m{1e-3, 0.0};
  CHECK_NOTHROW(m.validate());
  CHECK(m.gamma_zz(10.0) == doctest::Approx(0.99));
  CHECK(m.checked_offset(10.0) == doctest::Approx(1e-2));
  CHECK_THROWS_AS(m.checked_offset(1e4), LinearizationError);
  WeakFieldMetric bad{-1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  WeakFieldMetric near{1e-3, 0.0, 1.0};
  CHECK_THROWS_AS(near.check_height(50.0), DomainError);
  CHECK_NOTHROW(near.check_height(500.0));
  PhysicalConstants c = PhysicalConstants::scaled();
  c.c = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
