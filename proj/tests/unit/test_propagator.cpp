#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"

#include "qcollapse/gaussian_oracle.hpp"
#include "qcollapse/observables.hpp"
#include "qcollapse/propagator.hpp"

using namespace qcollapse;

TEST_CASE("gaussian packet normalization and moments") {
  const auto g = build_grid(-30, 30, 1501);
  const auto psi = gaussian_packet(g, -5.0, 1.0);
  CHECK(psi.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(psi.mean_position() == doctest::Approx(-5.0).epsilon(1e-10));
  const auto s = summarize_pdf(g, psi.density());
  CHECK(s.sd == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(s.skewness) < 1e-8);
  CHECK(std::abs(s.excess_kurtosis) < 1e-7);
}

TEST_CASE("projection deficit and truncation gate") {
  const auto basis = test::soft_impact_basis();
  const auto psi = gaussian_packet(basis->grid, -5.0, 1.0);
  const auto s = to_spectral(psi, basis);
  CHECK(s.deficit < 1e-3);
  CHECK(s.deficit >= -1e-12);
  // A packet far out in the stiff region needs modes beyond the basis.
  CHECK_THROWS_AS(to_spectral(gaussian_packet(basis->grid, 20.0, 0.3), basis), TruncationError);
}

TEST_CASE("expected energy of the initial state") {
  const OscillatorSpec o{1.0, 1.0, 0.0};
  CHECK(expected_energy_gaussian({-5.0, 1.0}, o) == 13.125);
  const auto basis = test::soft_impact_basis();
  const auto s = to_spectral(gaussian_packet(basis->grid, -5.0, 1.0), basis);
  CHECK(std::abs(expected_energy(s) - 13.125) / 13.125 < 1e-3);
}

TEST_CASE("evolution is unitary and energy-conserving") {
  const auto basis = test::soft_impact_basis();
  auto s = to_spectral(gaussian_packet(basis->grid, -5.0, 1.0), basis);
  const double w0 = s.weight();
  const double e0 = expected_energy(s);
  StepPropagator step(*basis, 0.1);
  Eigen::VectorXcd c = s.coefficients;
  for (int k = 0; k < 1000; ++k) step.step(c);
  CHECK(std::abs(c.squaredNorm() - w0) < 1e-12);
  SpectralState t{basis, c, s.deficit};
  CHECK(std::abs(expected_energy(t) - e0) < 1e-10);
  // Stepping agrees with a single evolve over the same interval.
  const auto direct = evolve(s, 100.0);
  CHECK((direct.coefficients - c).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS(evolve(s, -1.0));
}

TEST_CASE("harmonic packet returns after one period") {
  const auto basis = test::harmonic_basis();
  const auto s = to_spectral(gaussian_packet(basis->grid, -3.0, 1.0), basis);
  const auto back = to_position(evolve(s, 2.0 * M_PI)).psi;
  CHECK(back.mean_position() == doctest::Approx(-3.0).epsilon(1e-4));
  const auto half = to_position(evolve(s, M_PI)).psi;
  CHECK(half.mean_position() == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("reconstruction matches the packet") {
  const auto basis = test::soft_impact_basis();
  const auto psi = gaussian_packet(basis->grid, -5.0, 1.0);
  const auto rec = to_position(to_spectral(psi, basis));
  CHECK(std::abs(rec.psi.inner(psi)) > 1.0 - 1e-6);
}
