#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "qcollapse/observables.hpp"
#include "qcollapse/two_particle.hpp"

using namespace qcollapse;

namespace {

TwoParticleSystem mirrored_system() {
  const OscillatorSpec o1{1.0, 1.0, -2.0}, o2{1.0, 1.0, 2.0};
  return {test::harmonic_basis(1.0, -2.0), test::harmonic_basis(1.0, 2.0), o1, o2};
}

TwoParticleState start(const TwoParticleSystem& sys, double a1, double a2) {
  return TwoParticleState::from(to_spectral(gaussian_packet(sys.basis1->grid, a1, 1.0), sys.basis1),
                                to_spectral(gaussian_packet(sys.basis2->grid, a2, 1.0), sys.basis2));
}

}  // namespace

TEST_CASE("density overlap of equal unit gaussians") {
  const auto g = build_grid(-30, 30, 1501);
  const auto psi = gaussian_packet(g, 0.7, 1.0);
  CHECK(density_overlap(psi, psi) == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-10));
  CHECK(density_overlap(gaussian_packet(g, -5, 1), gaussian_packet(g, 5, 1)) < 1e-10);
  CHECK_THROWS(density_overlap(psi, gaussian_packet(build_grid(-30, 30, 1001), 0.0, 1.0)));
}

TEST_CASE("collapse location: symmetric product density has the centre as mean") {
  const auto g = build_grid(-30, 30, 1501);
  const auto p1 = gaussian_packet(g, -1.0, 1.0), p2 = gaussian_packet(g, 1.0, 1.0);
  Rng rng(10, 0);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto a = collapse_location(p1, p2, {-3.0, 3.0}, rng);
    REQUIRE(a);
    REQUIRE(*a >= -3.0);
    REQUIRE(*a <= 3.0);
    sum += *a;
    sq += *a * *a;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(n));
  // Product of two unit Gaussians at +-1: sd 1/sqrt(2).
  CHECK(sd == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-2));
  CHECK_FALSE(collapse_location(gaussian_packet(g, -20, 0.5), gaussian_packet(g, 20, 0.5), {-1, 1}, rng).has_value());
}

TEST_CASE("ground-state energy at the well centre gives the ground state") {
  const auto sys = mirrored_system();
  const auto f = fit_gaussian(sys.basis1, sys.osc1, -2.0, sys.osc1.ground_energy(), SigmaChoice::Smaller, true);
  CHECK(f.sigma == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  CHECK(f.energy == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(fit_gaussian(sys.basis1, sys.osc1, 10.0, 1.0, SigmaChoice::Smaller, true), std::domain_error);
}

TEST_CASE("sigma choice picks the requested root") {
  const auto sys = mirrored_system();
  const auto lo = fit_gaussian(sys.basis1, sys.osc1, -1.0, 3.0, SigmaChoice::Smaller, false);
  const auto hi = fit_gaussian(sys.basis1, sys.osc1, -1.0, 3.0, SigmaChoice::Larger, false);
  const auto roots = variance_roots(3.0, -1.0, sys.osc1);
  REQUIRE(roots.size() == 2);
  CHECK(lo.sigma == doctest::Approx(std::sqrt(roots[0])));
  CHECK(hi.sigma == doctest::Approx(std::sqrt(roots[1])));
}

TEST_CASE("individual conservation keeps each energy") {
  const auto sys = mirrored_system();
  const auto st = start(sys, -5.0, 5.0);
  CollapseProtocol p;
  p.kind = ProtocolKind::IndividualConservation;
  const auto d1 = allowed_domain(st.e1, sys.osc1), d2 = allowed_domain(st.e2, sys.osc2);
  const auto both = intersect(*d1, *d2);
  REQUIRE(both);
  for (double a : {both->lo + 0.1, 0.0, both->hi - 0.1}) {
    const auto c = collapse_individual(st, a, sys, p);
    CHECK(std::abs(c.state.e1 - st.e1) < 1e-6);
    CHECK(std::abs(c.state.e2 - st.e2) < 1e-6);
    CHECK(c.event.a == a);
  }
  CHECK_THROWS_AS(collapse_individual(st, both->hi + 1.0, sys, p), std::domain_error);
}

TEST_CASE("total conservation keeps the sum and moves energy") {
  const auto sys = mirrored_system();
  const auto st = start(sys, -5.0, 5.0);
  CollapseProtocol p;
  p.kind = ProtocolKind::TotalConservation;
  Rng rng(6, 0);
  int changed = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = collapse_total(st, 0.3 * i - 3.0, sys, p, rng);
    if (!c) continue;
    CHECK(std::abs(c->state.total() - st.total()) < 1e-6);
    CHECK(c->energy_miss() <= p.energy_tolerance);
    if (std::abs(c->state.e1 - st.e1) > 1e-3) ++changed;
  }
  CHECK(changed > 0);
}

TEST_CASE("two-particle runs: no-collapse symmetry and determinism") {
  TwoParticleSettings s;
  s.system = mirrored_system();
  s.n_steps = 400;
  s.protocol.kind = ProtocolKind::None;
  Rng rng(1, 0);
  const auto none = run_two_particle(s, rng);
  CHECK(none.events.empty());
  CHECK(none.position1.mean == doctest::Approx(-none.position2.mean).epsilon(1e-8));
  CHECK(none.position1.skewness == doctest::Approx(-none.position2.skewness).epsilon(1e-6));

  s.protocol.kind = ProtocolKind::TotalConservation;
  Rng a(3, 1), b(3, 1);
  const auto ra = run_two_particle(s, a);
  const auto rb = run_two_particle(s, b);
  REQUIRE(ra.events.size() == rb.events.size());
  REQUIRE_FALSE(ra.events.empty());
  for (std::size_t i = 0; i < ra.events.size(); ++i) {
    CHECK(ra.events[i].a == rb.events[i].a);
    CHECK(std::abs(ra.events[i].e1_post + ra.events[i].e2_post - ra.events[i].e1_pre - ra.events[i].e2_pre) < 1e-3);
  }
  CHECK(ra.e1.values == rb.e1.values);
}

TEST_CASE("zero coupling never collapses") {
  TwoParticleSettings s;
  s.system = mirrored_system();
  s.n_steps = 300;
  s.protocol.lambda = 0.0;
  Rng rng(2, 0);
  CHECK(run_two_particle(s, rng).events.empty());
}
