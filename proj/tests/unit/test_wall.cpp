#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "qcollapse/observables.hpp"
#include "qcollapse/propagator.hpp"
#include "qcollapse/wall_collapse.hpp"

using namespace qcollapse;

namespace {

WallPostulate postulate(WallPostulateKind k) {
  WallPostulate p;
  p.kind = k;
  return p;
}

// State whose beyond-wall mass is strictly between 0 and 1.
SpectralState straddling_state() {
  const auto basis = test::soft_impact_basis();
  return to_spectral(gaussian_packet(basis->grid, 4.5, 1.0), basis);
}

}  // namespace

TEST_CASE("beyond-wall mass counts the wall point") {
  const auto g = build_grid(-30, 30, 1501);
  const auto psi = gaussian_packet(g, 5.0, 1.0);
  // Half the mass plus the wall point's own dx-weighted density.
  const double expected = 0.5 + 0.5 * g.dx() / std::sqrt(2.0 * M_PI);
  CHECK(beyond_wall_probability(psi, 5.0) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(beyond_wall_probability(psi, 5.0 + 1e-12) == beyond_wall_probability(psi, 5.0));
  CHECK(beyond_wall_probability(gaussian_packet(g, -5.0, 1.0), 5.0) < 1e-20);
}

TEST_CASE("projector form equals the position-space sum") {
  const auto basis = test::soft_impact_basis();
  WallCollapser w(basis, postulate(WallPostulateKind::P1));
  auto s = to_spectral(gaussian_packet(basis->grid, -5.0, 1.0), basis);
  for (double t : {0.0, 1.3, 2.9, 3.1, 7.7}) {
    const auto st = evolve(s, t);
    CHECK(w.beyond_mass(st.coefficients) ==
          doctest::Approx(beyond_wall_probability(to_position(st).psi, 5.0)).epsilon(1e-9));
  }
}

TEST_CASE("sample_index inverts the cumulative weights") {
  const Eigen::VectorXd w = (Eigen::VectorXd(4) << 1.0, 0.0, 2.0, 1.0).finished();
  CHECK(sample_index(w, 0.0) == 0);
  CHECK(sample_index(w, 0.2) == 0);
  CHECK(sample_index(w, 0.3) == 2);
  CHECK(sample_index(w, 0.74) == 2);
  CHECK(sample_index(w, 0.76) == 3);
  CHECK(sample_index(w, 0.999999) == 3);
}

TEST_CASE("collapsed packet is a narrow normalized gaussian") {
  const auto basis = test::soft_impact_basis();
  const auto s = collapsed_packet(basis, 5.0, 0.25);
  CHECK(s.weight() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.deficit < 1e-3);
  const auto rec = to_position(s).psi;
  CHECK(rec.mean_position() == doctest::Approx(5.0).epsilon(2e-3));
}

TEST_CASE("postulate parameters are validated") {
  auto p = postulate(WallPostulateKind::P1);
  p.r = 1.0;
  CHECK_THROWS(p.validate());
  p.r = 0.0;
  CHECK_THROWS(p.validate());
  p.r = 0.5;
  p.sigma_post = 0.0;
  CHECK_THROWS(p.validate());
  CHECK(postulate_from_string("P3") == WallPostulateKind::P3);
  CHECK(postulate_from_string("4") == WallPostulateKind::P4);
  CHECK_THROWS(postulate_from_string("5"));
}

TEST_CASE("P1 threshold near one never fires on the grazing trajectory") {
  auto p = postulate(WallPostulateKind::P1);
  p.r = 0.999;
  WallRunSettings s;
  s.basis = test::soft_impact_basis();
  s.n_steps = 2000;
  s.postulate = p;
  Rng rng(1, 0);
  const auto r = run_wall_simulation(s, rng);
  CHECK(r.events.empty());
}

TEST_CASE("P2 per-check collapse frequency equals the beyond-wall mass") {
  const auto state = straddling_state();
  auto p = postulate(WallPostulateKind::P2);
  p.redraw = ThresholdRedraw::PerCheck;
  WallCollapser w(state.basis, p);
  const double q = w.beyond_mass(state.coefficients);
  REQUIRE(q > 0.1);
  REQUIRE(q < 0.9);
  Rng rng(11, 0);
  const int n = 4000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += w.check_and_collapse(state, 1, 0.1, rng).has_value() ? 1 : 0;
  const double se = std::sqrt(q * (1 - q) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - q) < 4.0 * se);
}

TEST_CASE("per-collapse redraw keeps the threshold until a collapse") {
  const auto basis = test::soft_impact_basis();
  const auto far = to_spectral(gaussian_packet(basis->grid, -5.0, 1.0), basis);
  auto p = postulate(WallPostulateKind::P2);
  p.redraw = ThresholdRedraw::PerCollapse;
  WallCollapser w(basis, p);
  Rng rng(4, 0), reference(4, 0);
  for (int i = 0; i < 20; ++i) CHECK_FALSE(w.check_and_collapse(far, 1, 0.1, rng).has_value());
  reference.uniform();
  CHECK(rng() == reference());
}

TEST_CASE("P3 samples the collapse point from the Born density") {
  const auto state = straddling_state();
  auto p = postulate(WallPostulateKind::P3);
  p.r = 0.05;
  WallCollapser w(state.basis, p);
  Rng rng(8, 0);
  const int n = 3000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto hit = w.check_and_collapse(state, 1, 0.1, rng);
    REQUIRE(hit);
    sum += hit->event.location;
  }
  const auto psi = to_position(state).psi;
  const auto stats = summarize_pdf(psi.grid(), psi.density());
  CHECK(std::abs(sum / n - stats.mean) < 4.0 * stats.sd / std::sqrt(n));

  p.sampling = LocationSampling::BeyondWall;
  WallCollapser beyond(state.basis, p);
  for (int i = 0; i < 200; ++i) CHECK(beyond.check_and_collapse(state, 1, 0.1, rng)->event.location >= 5.0);
}

TEST_CASE("wall runs are deterministic per seed") {
  WallRunSettings s;
  s.basis = test::soft_impact_basis();
  s.n_steps = 1500;
  s.postulate = postulate(WallPostulateKind::P4);
  Rng a(77, 3), b(77, 3), c(78, 3);
  const auto ra = run_wall_simulation(s, a);
  const auto rb = run_wall_simulation(s, b);
  const auto rc = run_wall_simulation(s, c);
  REQUIRE(ra.events.size() == rb.events.size());
  for (std::size_t i = 0; i < ra.events.size(); ++i) {
    CHECK(ra.events[i].step_index == rb.events[i].step_index);
    CHECK(ra.events[i].location == rb.events[i].location);
  }
  CHECK(ra.mean_energy == rb.mean_energy);
  CHECK(ra.mean_energy != rc.mean_energy);
}

TEST_CASE("unitary run keeps the energy and refractory guard spaces events") {
  WallRunSettings s;
  s.basis = test::soft_impact_basis();
  s.n_steps = 1000;
  s.capture_steps = {0, 20};
  Rng rng(1, 0);
  const auto u = run_wall_simulation(s, rng);
  CHECK(u.events.empty());
  CHECK(u.mean_energy == doctest::Approx(u.initial_energy).epsilon(1e-12));
  CHECK(u.energy_probabilities.sum() == doctest::Approx(1.0 - u.initial_deficit).epsilon(1e-10));
  CHECK(u.captured.size() == 2);
  CHECK(u.snapshots.size() == 101);

  auto p = postulate(WallPostulateKind::P1);
  p.refractory_steps = 5;
  s.postulate = p;
  const auto c = run_wall_simulation(s, rng);
  REQUIRE_FALSE(c.events.empty());
  for (std::size_t i = 1; i < c.events.size(); ++i)
    CHECK(c.events[i].step_index - c.events[i - 1].step_index >= 5);
  s.capture_steps = {5000};
  CHECK_THROWS(run_wall_simulation(s, rng));
}
