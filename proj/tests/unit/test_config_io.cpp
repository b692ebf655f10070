#include <fstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"

#include "qcollapse/config.hpp"
#include "qcollapse/io.hpp"

using namespace qcollapse;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults follow the reference parameters") {
  const auto c = parse_config("[run]\nscenario = wall_unitary\nseed = 1\n");
  CHECK(c.dt == 0.1);
  CHECK(c.n_steps == 10000);
  CHECK(c.n_modes == 150);
  CHECK(c.grid.n_points == 1501);
  CHECK(c.grid.stencil == KineticStencil::FourthOrder);
  const auto& p = std::get<SoftImpact>(c.potential);
  CHECK(p.k1 == 1.0);
  CHECK(p.k2 == 10.0);
  CHECK(p.x_wall == 5.0);
  CHECK(c.initial_center == -5.0);
  CHECK(c.initial_sigma == 1.0);
  CHECK_FALSE(c.postulate.has_value());
}

TEST_CASE("wall collapse section") {
  const auto c = parse_config(
      "[run]\nscenario = wall_collapse\nseed = 3\n[wall_collapse]\npostulate = 4\nr_redraw = check\n"
      "location_sampling = beyond_wall\n");
  REQUIRE(c.postulate);
  CHECK(c.postulate->kind == WallPostulateKind::P4);
  CHECK(c.postulate->redraw == ThresholdRedraw::PerCheck);
  CHECK(c.postulate->sampling == LocationSampling::BeyondWall);
  CHECK(c.postulate->wall == 5.0);
  CHECK(parse_config("[run]\nscenario = wall_collapse\nseed = 3\n[wall_collapse]\npostulate = 2\n").postulate->redraw ==
        ThresholdRedraw::PerCollapse);
}

TEST_CASE("config errors name the key") {
  CHECK(error_of("[run]\nn_steps = 5\n") == "missing required keys: run.scenario, run.seed");
  CHECK(error_of("[run]\nscenario = wall_unitary\nseed = 1\nbogus = 2\n") == "run.bogus: unknown key");
  CHECK(error_of("[run]\nscenario = wall_collapse\nseed = 1\n[wall_collapse]\npostulate = 1\nr = 1.5\n") ==
        "wall_collapse.r: r ∈ (0,1)");
  CHECK(error_of("[run]\nscenario = wall_unitary\nseed = 1\ndt = -1\n") == "run.dt: must be > 0");
  CHECK(error_of("[run]\nscenario = wall_unitary\nseed = 1\n[two_particle]\nk1 = 1\n").rfind("two_particle:", 0) == 0);
  CHECK(error_of("[run]\nscenario = teleport\nseed = 1\n").rfind("run.scenario", 0) == 0);
  CHECK(error_of("[run]\nscenario = wall_unitary\nseed = x\n").rfind("run.seed", 0) == 0);
  CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("hash ignores output location and thread count") {
  const auto a = parse_config("[run]\nscenario = wall_unitary\nseed = 1\noutput_dir = a\nthreads = 1\n");
  const auto b = parse_config("[run]\nscenario = wall_unitary\nseed = 1\noutput_dir = b\nthreads = 4\n");
  const auto c = parse_config("[run]\nscenario = wall_unitary\nseed = 2\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.to_json()["run"]["n_modes"] == 150);
}

TEST_CASE("two particle section") {
  const auto c = parse_config(
      "[run]\nscenario = two_particle\nseed = 1\n[two_particle]\nprotocol = total\nk2 = 10\nm2 = 0.1\nlambda = 2\n");
  CHECK(c.two_particle.protocol.kind == ProtocolKind::TotalConservation);
  CHECK(c.two_particle.osc2.k == 10.0);
  CHECK(c.two_particle.osc2.m == 0.1);
  CHECK(c.two_particle.osc1.c == -2.0);
  CHECK(c.two_particle.protocol.lambda == 2.0);
  CHECK(error_of("[run]\nscenario = two_particle\nseed = 1\n[potential]\nk1 = 1\n").rfind("potential:", 0) == 0);
}

TEST_CASE("sha256 and csv formatting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(format_double(0.1) == "0.10000000000000001");
  const auto dir = test::scratch_dir("csv");
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row(1.5, std::size_t{2});
    w.row(-0.25, 3);
  }
  const auto t = read_csv(dir / "t.csv");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][t.column("a")] == -0.25);
  CHECK(sha256_file(dir / "t.csv") == sha256_hex("a,b\n1.5,2\n-0.25,3\n"));
}
