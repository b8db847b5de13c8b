#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gravdephase/emission.hpp"
#include "gravdephase/errors.hpp"
#include "gravdephase/modes.hpp"
#include "support/decay_oracle.hpp"

using namespace gd;

namespace {
const PhysicalConstants kScaled = PhysicalConstants::scaled();

EnsembleSpec cube(std::size_t n, double edge) {
  EnsembleSpec spec;
  spec.n_atoms = n;
  spec.box.edges = Vec3::Constant(edge);
  spec.nu = 1.0;
  spec.gamma = 1e-2;
  return spec;
}
}  // namespace

TEST_CASE("atom and box validation") {
  Atom atom;
  atom.nu = 1.0;
  atom.gamma = 1e-2;
  CHECK_NOTHROW(atom.validate());
  atom.gamma = 0.02;
  CHECK_THROWS_AS(atom.validate(), DomainError);
  atom.gamma = 0.0;
  CHECK_THROWS_AS(atom.validate(), DomainError);
  Box box;
  box.edges = Vec3(1, 0, 1);
  CHECK_THROWS_AS(box.validate(), DomainError);
  box.edges = Vec3(2, 2, 2);
  CHECK(box.contains(Vec3(0.9, -0.9, 1.0)));
  CHECK_FALSE(box.contains(Vec3(0.0, 0.0, 1.1)));
}

TEST_CASE("ensemble sampling is reproducible and inside the box") {
  EnsembleSpec spec = cube(500, 3.0);
  spec.box.center = Vec3(1, 2, 3);
  const Ensemble a = sample_ensemble(spec, 42, 0);
  const Ensemble b = sample_ensemble(spec, 42, 0);
  const Ensemble c = sample_ensemble(spec, 42, 1);
  REQUIRE(a.size() == 500);
  bool same = true, differs = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.box.contains(a.atoms[j].r));
    same = same && a.atoms[j].r == b.atoms[j].r;
    differs = differs || a.atoms[j].r != c.atoms[j].r;
  }
  CHECK(same);
  CHECK(differs);
  CHECK(std::all_of(a.weights.begin(), a.weights.end(), [](double w) { return w == 1.0; }));

  WeakFieldMetric m{1e-2, 0.0};
  const Ensemble weighted = sample_ensemble(spec, 42, 0, &m);
  CHECK(weighted.weights[0] == doctest::Approx(m.volume_density(weighted.atoms[0].r.z())));
  CHECK_THROWS_AS(sample_ensemble(cube(0, 1.0), 1), DomainError);
}

TEST_CASE("coupling constant") {
  const PerturbedMode mode({Vec3(0, 0, 1), 1}, WeakFieldMetric{}, kScaled, 1.0);
  Atom atom;
  atom.gamma = 1e-2;
  atom.d = Vec3::UnitY();  // orthogonal to f = x
  CHECK(std::abs(coupling_v(mode, atom)) == 0.0);
  atom.d = Vec3(2.0, 0.0, 0.0);
  const cdouble v = coupling_v(mode, atom);
  CHECK(v.real() == doctest::Approx(-2.0 * mode.flat_amplitude()));
  CHECK(v.imag() == 0.0);
}

TEST_CASE("flat timed Dicke state") {
  const Ensemble one = sample_ensemble(cube(1, 1.0), 3);
  const TimedDickeState s1 = flat_timed_dicke(one, Vec3(0, 0, 1));
  CHECK(std::abs(s1.amplitudes[0]) == doctest::Approx(1.0));

  Ensemble origin = sample_ensemble(cube(16, 1.0), 3);
  for (auto& atom : origin.atoms) atom.r = Vec3::Zero();
  const TimedDickeState s = flat_timed_dicke(origin, Vec3(0.3, 0, 1));
  for (const auto& c : s.amplitudes) CHECK(std::abs(c - cdouble(0.25, 0.0)) < 1e-15);

  const Ensemble many = sample_ensemble(cube(1000, 10.0), 5);
  const TimedDickeState big = flat_timed_dicke(many, Vec3(0.5, 0.2, 0.7));
  CHECK(big.norm() == doctest::Approx(1.0).epsilon(1e-13));
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(std::arg(big.amplitudes[j] / std::polar(1.0, big.k0.dot(many.atoms[j].r))) ==
          doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("curved timed Dicke state") {
  EnsembleSpec spec = cube(400, 20.0);
  const Ensemble ens = sample_ensemble(spec, 9);
  const Vec3 k0(0, 0.6, 0.8);
  const TimedDickeState flat = flat_timed_dicke(ens, k0);

  SUBCASE("a = 0 and F = 0 reproduce the flat state") {
    const TimedDickeState a0 = curved_timed_dicke(ens, k0, WeakFieldMetric{}, {0.7, 0.3});
    const TimedDickeState f0 = curved_timed_dicke(ens, k0, WeakFieldMetric{1e-3, 0.0}, {});
    for (std::size_t j = 0; j < ens.size(); ++j) {
      CHECK(std::abs(a0.amplitudes[j] - flat.amplitudes[j]) < 1e-14);
      CHECK(std::abs(f0.amplitudes[j] - flat.amplitudes[j]) < 1e-14);
    }
    CHECK_FALSE(f0.linearization_warning());
  }
  SUBCASE("continuous in a, linear rate") {
    const FCorrectionParams f{0.5, 0.05};
    double dev1 = 0.0, dev2 = 0.0;
    const TimedDickeState s1 = curved_timed_dicke(ens, k0, WeakFieldMetric{1e-4, 0.0}, f);
    const TimedDickeState s2 = curved_timed_dicke(ens, k0, WeakFieldMetric{5e-5, 0.0}, f);
    for (std::size_t j = 0; j < ens.size(); ++j) {
      dev1 = std::max(dev1, std::abs(s1.amplitudes[j] - flat.amplitudes[j]));
      dev2 = std::max(dev2, std::abs(s2.amplitudes[j] - flat.amplitudes[j]));
    }
    CHECK(dev1 > 0.0);
    CHECK(dev1 / dev2 == doctest::Approx(2.0).epsilon(0.01));
    CHECK(s1.norm() == doctest::Approx(1.0));
  }
  SUBCASE("large corrections raise the linearization warning") {
    const TimedDickeState s = curved_timed_dicke(ens, k0, WeakFieldMetric{1e-2, 0.0}, {2.0, 0.0});
    CHECK(s.linearization_warning());
  }
}

TEST_CASE("single-atom survival") {
  CHECK(single_atom_survival(0.0, 0.3) == 1.0);
  CHECK(single_atom_survival(2.0 / 0.3, 0.3) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS_AS(single_atom_survival(-1.0, 0.3), DomainError);
}

TEST_CASE("survival matches the memory-kernel equation") {
  const double gamma = 1.0;
  const auto oracle = testing::solve_decay_oracle(gamma, 1000.0, 5.0, 3e-4);
  double worst = 0.0;
  for (double t = 0.0; t <= 5.0; t += 0.05) {
    worst = std::max(worst, std::abs(oracle.at(t) - single_atom_survival(t, gamma)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("lab-frame modal amplitude") {
  Atom atom;
  atom.nu = 1.0;
  atom.gamma = 1e-2;
  const WeakFieldMetric flat;
  const cdouble v(0.3, -0.1);
  SUBCASE("flat, on resonance") {
    const cdouble amp = modal_amplitude_lab(v, 1.0, atom, 0.0, 0.0, flat);
    CHECK(std::abs(amp - v / cdouble(0.0, -0.005)) < 1e-12);
    CHECK(std::abs(amp) == doctest::Approx(2.0 * std::abs(v) / atom.gamma));
  }
  SUBCASE("flat Lorentzian") {
    for (double w : {0.97, 0.995, 1.0, 1.02}) {
      const cdouble amp = modal_amplitude_lab(v, w, atom, 0.0, 0.0, flat);
      CHECK(std::abs(amp - v / cdouble(w - 1.0, -0.005)) < 1e-12);
    }
  }
  SUBCASE("redshift moves the resonance") {
    const WeakFieldMetric m{1e-3, 0.0};
    atom.r = Vec3(0, 0, 2.0);
    const double Z = 10.0;
    // resonance where omega (1 + a (Z - z_at)/2) = nu
    const double w_res = 1.0 / (1.0 + 0.5 * 1e-3 * (Z - 2.0));
    const cdouble amp = modal_amplitude_lab(v, w_res, atom, Z, 0.0, m);
    const double lab = 1.0 - 0.5 * 1e-3 * 2.0;
    CHECK(std::abs(amp) == doctest::Approx(lab * 2.0 * std::abs(v) / atom.gamma).epsilon(1e-9));
  }
  SUBCASE("mode overload uses the coupling") {
    const PerturbedMode mode({Vec3(0, 0, 1), 1}, flat, kScaled, 1.0);
    atom.d = Vec3::UnitX();
    const cdouble amp = modal_amplitude_lab(mode, atom, 0.0, 0.0, flat);
    CHECK(std::abs(amp - coupling_v(mode, atom) / cdouble(0.0, -0.005)) < 1e-12);
  }
  SUBCASE("nonlocal variant agrees in flat space") {
    const cdouble a1 = modal_amplitude_lab(v, 1.01, atom, 0.0, 0.0, flat);
    const cdouble a2 = modal_amplitude_nonlocal(v, 1.01, atom, 0.0, 0.0, flat);
    CHECK(std::abs(a1 - a2) < 1e-12);
  }
}
