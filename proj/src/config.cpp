#include "qcollapse/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qcollapse/io.hpp"

namespace qcollapse {

namespace pt = boost::property_tree;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::WallUnitary: return "wall_unitary";
    case Scenario::WallCollapse: return "wall_collapse";
    case Scenario::TwoParticle: return "two_particle";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "wall_unitary") return Scenario::WallUnitary;
  if (s == "wall_collapse") return Scenario::WallCollapse;
  if (s == "two_particle") return Scenario::TwoParticle;
  throw std::invalid_argument("scenario must be wall_unitary|wall_collapse|two_particle");
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Tracks which keys were read so that anything left over can be rejected.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [name, node] : tree_) {
      if (node.empty() && !node.data().empty()) throw ConfigError(name, "key outside a [section]");
    }
  }

  bool has_section(const std::string& section) const { return tree_.find(section) != tree_.not_found(); }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    const auto sec = tree_.find(section);
    if (sec == tree_.not_found()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return std::nullopt;
    used_.insert(section + "." + key);
    return trim(it->second.data());
  }

  template <class T, class Parse>
  T get(const std::string& section, const std::string& key, T fallback, Parse parse) {
    const auto v = raw(section, key);
    if (!v) return fallback;
    try {
      return parse(*v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(section + "." + key, e.what());
    }
  }

  double real(const std::string& s, const std::string& k, double fallback) {
    return get(s, k, fallback, parse_real);
  }
  std::size_t count(const std::string& s, const std::string& k, std::size_t fallback) {
    return get(s, k, fallback, [](const std::string& v) { return static_cast<std::size_t>(parse_u64(v)); });
  }
  std::uint64_t u64(const std::string& s, const std::string& k, std::uint64_t fallback) {
    return get(s, k, fallback, parse_u64);
  }
  std::string text(const std::string& s, const std::string& k, std::string fallback) {
    return get(s, k, std::move(fallback), [](const std::string& v) { return v; });
  }
  bool flag(const std::string& s, const std::string& k, bool fallback) {
    return get(s, k, fallback, [](const std::string& v) {
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      throw std::invalid_argument("expected true|false");
    });
  }
  std::vector<double> reals(const std::string& s, const std::string& k, std::vector<double> fallback) {
    return get(s, k, std::move(fallback), [](const std::string& v) {
      std::vector<double> out;
      std::stringstream in(v);
      std::string item;
      while (std::getline(in, item, ',')) out.push_back(parse_real(trim(item)));
      return out;
    });
  }

  void reject_section(const std::string& section, const std::string& why) const {
    if (has_section(section)) throw ConfigError(section, why);
  }

  void reject_unused() const {
    for (const auto& [section, node] : tree_) {
      for (const auto& [key, value] : node) {
        const std::string path = section + "." + key;
        if (!used_.count(path)) throw ConfigError(path, "unknown key");
      }
    }
  }

  static double parse_real(const std::string& v) {
    if (v.empty()) throw std::invalid_argument("expected a number");
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || !std::isfinite(x)) throw std::invalid_argument("expected a finite number, got '" + v + "'");
    return x;
  }

  static std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
    return x;
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

template <class F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

nlohmann::json oscillator_json(const OscillatorSpec& o) { return {{"m", o.m}, {"k", o.k}, {"c", o.c}}; }

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed configuration: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
  }
  Reader r(tree);

  std::vector<std::string> missing;
  const auto scenario_text = r.raw("run", "scenario");
  const auto seed_text = r.raw("run", "seed");
  if (!scenario_text) missing.push_back("run.scenario");
  if (!seed_text) missing.push_back("run.seed");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("", "missing required keys: " + list);
  }

  RunConfig c;
  c.scenario = with_key("run.scenario", [&] { return scenario_from_string(*scenario_text); });
  c.seed = with_key("run.seed", [&] { return Reader::parse_u64(*seed_text); });
  c.ensemble_size = r.count("run", "ensemble_size", c.ensemble_size);
  c.threads = r.count("run", "threads", c.threads);
  c.dt = r.real("run", "dt", c.dt);
  c.n_steps = r.count("run", "n_steps", c.n_steps);
  c.n_modes = r.count("run", "n_modes", c.n_modes);
  c.max_deficit = r.real("run", "max_deficit", c.max_deficit);
  c.decimation = r.count("run", "decimation", c.decimation);
  c.output_dir = r.text("run", "output_dir", c.output_dir);
  c.eigen_cache_dir = r.text("run", "eigen_cache_dir", c.eigen_cache_dir);

  c.grid.x_min = r.real("grid", "x_min", c.grid.x_min);
  c.grid.x_max = r.real("grid", "x_max", c.grid.x_max);
  c.grid.n_points = r.count("grid", "n_points", c.grid.n_points);
  c.grid.stencil = r.get("grid", "stencil", c.grid.stencil, stencil_from_string);

  const bool wall = c.scenario != Scenario::TwoParticle;
  if (wall) {
    const auto kind = r.text("potential", "kind", "soft_impact");
    c.mass = r.real("potential", "mass", c.mass);
    if (kind == "soft_impact") {
      SoftImpact p{1.0, 10.0, 5.0};
      p.k1 = r.real("potential", "k1", p.k1);
      p.k2 = r.real("potential", "k2", p.k2);
      p.x_wall = r.real("potential", "x_wall", p.x_wall);
      c.potential = p;
    } else if (kind == "harmonic") {
      Harmonic p{1.0, 0.0};
      p.k = r.real("potential", "k", p.k);
      p.center = r.real("potential", "center", p.center);
      c.potential = p;
    } else {
      throw ConfigError("potential.kind", "must be soft_impact|harmonic");
    }
    c.initial_center = r.real("initial", "center", c.initial_center);
    c.initial_sigma = r.real("initial", "sigma", c.initial_sigma);
    r.reject_section("two_particle", "section only applies to scenario = two_particle");
  } else {
    r.reject_section("potential", "section does not apply to scenario = two_particle (use [two_particle])");
    r.reject_section("initial", "section does not apply to scenario = two_particle (use [two_particle])");
  }

  if (c.scenario == Scenario::WallCollapse) {
    WallPostulate w;
    if (const auto* si = std::get_if<SoftImpact>(&c.potential)) w.wall = si->x_wall;
    const auto kind = r.raw("wall_collapse", "postulate");
    if (!kind) throw ConfigError("", "missing required keys: wall_collapse.postulate");
    w.kind = with_key("wall_collapse.postulate", [&] { return postulate_from_string(*kind); });
    w.r = r.real("wall_collapse", "r", w.r);
    w.sigma_post = r.real("wall_collapse", "sigma_post", w.sigma_post);
    w.wall = r.real("wall_collapse", "wall_position", w.wall);
    w.refractory_steps = r.count("wall_collapse", "refractory_steps", w.refractory_steps);
    w.sampling = r.get("wall_collapse", "location_sampling", w.sampling, sampling_from_string);
    w.redraw = r.get("wall_collapse", "r_redraw", ThresholdRedraw::PerCollapse, redraw_from_string);
    c.postulate = w;
  } else {
    r.reject_section("wall_collapse", "section only applies to scenario = wall_collapse");
  }

  if (c.scenario == Scenario::TwoParticle) {
    auto& t = c.two_particle;
    const std::string s = "two_particle";
    t.osc1.k = r.real(s, "k1", t.osc1.k);
    t.osc2.k = r.real(s, "k2", t.osc2.k);
    t.osc1.m = r.real(s, "m1", t.osc1.m);
    t.osc2.m = r.real(s, "m2", t.osc2.m);
    t.osc1.c = r.real(s, "c1", t.osc1.c);
    t.osc2.c = r.real(s, "c2", t.osc2.c);
    t.a0_1 = r.real(s, "a0_1", t.a0_1);
    t.a0_2 = r.real(s, "a0_2", t.a0_2);
    t.sigma0 = r.real(s, "sigma0", t.sigma0);
    auto& p = t.protocol;
    p.kind = r.get(s, "protocol", p.kind, protocol_from_string);
    p.lambda = r.real(s, "lambda", p.lambda);
    p.sigma_choice = r.get(s, "sigma_choice", p.sigma_choice, sigma_choice_from_string);
    p.sampling = r.get(s, "sampling_density", p.sampling, sampling_density_from_string);
    p.refine_energy = r.flag(s, "energy_refine", p.refine_energy);
    p.energy_tolerance = r.real(s, "energy_tolerance", p.energy_tolerance);
    p.max_resample = r.count(s, "max_resample", p.max_resample);
    p.refractory_steps = r.count(s, "refractory_steps", p.refractory_steps);
  }

  auto& a = c.analysis;
  a.snapshot_times = r.reals("analysis", "snapshot_times", a.snapshot_times);
  a.p_count = r.count("analysis", "p_count", a.p_count);
  a.p_max = r.real("analysis", "p_max", a.p_max);
  a.wigner_x_stride = r.count("analysis", "wigner_x_stride", a.wigner_x_stride);
  a.chaos_nc = r.count("analysis", "chaos_nc", a.chaos_nc);
  a.window = r.get("analysis", "spectrum_window", a.window, window_from_string);
  a.eigen_count = r.count("analysis", "eigen_count", a.eigen_count);

  auto& cv = c.curves;
  cv.osc.k = r.real("curves", "k", cv.osc.k);
  cv.osc.m = r.real("curves", "m", cv.osc.m);
  cv.osc.c = r.real("curves", "c", cv.osc.c);
  cv.energies = r.reals("curves", "energies", cv.energies);
  cv.a_points = r.count("curves", "a_points", cv.a_points);

  r.reject_unused();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const RunConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("run.dt", "must be > 0");
  if (c.n_steps < 1) throw ConfigError("run.n_steps", "must be >= 1");
  if (c.n_modes < 1) throw ConfigError("run.n_modes", "must be >= 1");
  if (c.ensemble_size < 1) throw ConfigError("run.ensemble_size", "must be >= 1");
  if (!(c.max_deficit > 0.0 && c.max_deficit < 1.0)) throw ConfigError("run.max_deficit", "must lie in (0,1)");
  if (c.decimation < 1) throw ConfigError("run.decimation", "must be >= 1");
  with_key("grid", [&] { return build_grid(c.grid.x_min, c.grid.x_max, c.grid.n_points); });
  if (c.n_modes > c.grid.n_points - 2) throw ConfigError("run.n_modes", "exceeds the number of interior grid points");
  if (c.scenario != Scenario::TwoParticle) {
    if (!(c.mass > 0.0)) throw ConfigError("potential.mass", "must be > 0");
    with_key("potential", [&] {
      qcollapse::validate(c.potential);
      return 0;
    });
    if (!(c.initial_sigma > 0.0)) throw ConfigError("initial.sigma", "must be > 0");
    if (c.initial_center < c.grid.x_min || c.initial_center > c.grid.x_max)
      throw ConfigError("initial.center", "outside the grid");
  }
  if (c.scenario == Scenario::WallCollapse) {
    if (!c.postulate) throw ConfigError("wall_collapse.postulate", "required");
    const auto& w = *c.postulate;
    if (!w.random_threshold() && !(w.r > 0.0 && w.r < 1.0)) throw ConfigError("wall_collapse.r", "r ∈ (0,1)");
    if (!(w.sigma_post > 0.0)) throw ConfigError("wall_collapse.sigma_post", "must be > 0");
    if (w.refractory_steps < 1) throw ConfigError("wall_collapse.refractory_steps", "must be >= 1");
    if (w.wall < c.grid.x_min || w.wall > c.grid.x_max) throw ConfigError("wall_collapse.wall_position", "outside the grid");
  }
  if (c.scenario == Scenario::TwoParticle) {
    const auto& t = c.two_particle;
    with_key("two_particle", [&] {
      t.osc1.validate();
      t.osc2.validate();
      return 0;
    });
    if (!(t.sigma0 > 0.0)) throw ConfigError("two_particle.sigma0", "must be > 0");
    if (!(t.protocol.lambda >= 0.0)) throw ConfigError("two_particle.lambda", "must be >= 0");
    if (!(t.protocol.energy_tolerance > 0.0)) throw ConfigError("two_particle.energy_tolerance", "must be > 0");
    if (t.protocol.refractory_steps < 1) throw ConfigError("two_particle.refractory_steps", "must be >= 1");
    for (const auto& [key, x] : {std::pair{"two_particle.a0_1", t.a0_1}, std::pair{"two_particle.a0_2", t.a0_2}})
      if (x < c.grid.x_min || x > c.grid.x_max) throw ConfigError(key, "outside the grid");
  }
  const auto& a = c.analysis;
  for (double t : a.snapshot_times)
    if (!(t >= 0.0)) throw ConfigError("analysis.snapshot_times", "times must be >= 0");
  if (a.p_count < 2) throw ConfigError("analysis.p_count", "must be >= 2");
  if (!(a.p_max > 0.0)) throw ConfigError("analysis.p_max", "must be > 0");
  if (a.wigner_x_stride < 1) throw ConfigError("analysis.wigner_x_stride", "must be >= 1");
  if (a.chaos_nc != 0 && a.chaos_nc < 50) throw ConfigError("analysis.chaos_nc", "must be 0 (off) or >= 50");
  if (a.eigen_count < 1) throw ConfigError("analysis.eigen_count", "must be >= 1");
  with_key("curves", [&] {
    c.curves.osc.validate();
    return 0;
  });
  for (double e : c.curves.energies)
    if (!(e > 0.0)) throw ConfigError("curves.energies", "energies must be > 0");
  if (c.curves.a_points < 2) throw ConfigError("curves.a_points", "must be >= 2");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["run"] = {{"scenario", to_string(scenario)},
              {"seed", seed},
              {"ensemble_size", ensemble_size},
              {"threads", threads},
              {"dt", dt},
              {"n_steps", n_steps},
              {"n_modes", n_modes},
              {"max_deficit", max_deficit},
              {"decimation", decimation},
              {"output_dir", output_dir},
              {"eigen_cache_dir", eigen_cache_dir}};
  j["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n_points", grid.n_points},
               {"stencil", to_string(grid.stencil)}};
  if (scenario != Scenario::TwoParticle) {
    nlohmann::json p{{"mass", mass}};
    if (const auto* si = std::get_if<SoftImpact>(&potential)) {
      p["kind"] = "soft_impact";
      p["k1"] = si->k1;
      p["k2"] = si->k2;
      p["x_wall"] = si->x_wall;
    } else {
      const auto& h = std::get<Harmonic>(potential);
      p["kind"] = "harmonic";
      p["k"] = h.k;
      p["center"] = h.center;
    }
    j["potential"] = p;
    j["initial"] = {{"center", initial_center}, {"sigma", initial_sigma}};
  }
  if (postulate) {
    const auto& w = *postulate;
    j["wall_collapse"] = {{"postulate", to_string(w.kind)},
                          {"r", w.r},
                          {"sigma_post", w.sigma_post},
                          {"wall_position", w.wall},
                          {"refractory_steps", w.refractory_steps},
                          {"location_sampling", to_string(w.sampling)},
                          {"r_redraw", to_string(w.redraw)}};
  }
  if (scenario == Scenario::TwoParticle) {
    const auto& t = two_particle;
    const auto& p = t.protocol;
    j["two_particle"] = {{"oscillator1", oscillator_json(t.osc1)},
                         {"oscillator2", oscillator_json(t.osc2)},
                         {"a0_1", t.a0_1},
                         {"a0_2", t.a0_2},
                         {"sigma0", t.sigma0},
                         {"protocol", to_string(p.kind)},
                         {"lambda", p.lambda},
                         {"sigma_choice", to_string(p.sigma_choice)},
                         {"sampling_density", to_string(p.sampling)},
                         {"energy_refine", p.refine_energy},
                         {"energy_tolerance", p.energy_tolerance},
                         {"max_resample", p.max_resample},
                         {"refractory_steps", p.refractory_steps}};
  }
  j["analysis"] = {{"snapshot_times", analysis.snapshot_times},
                   {"p_count", analysis.p_count},
                   {"p_max", analysis.p_max},
                   {"wigner_x_stride", analysis.wigner_x_stride},
                   {"chaos_nc", analysis.chaos_nc},
                   {"spectrum_window", to_string(analysis.window)},
                   {"eigen_count", analysis.eigen_count}};
  j["curves"] = {{"oscillator", oscillator_json(curves.osc)},
                 {"energies", curves.energies},
                 {"a_points", curves.a_points}};
  return j;
}

std::string RunConfig::hash() const {
  auto j = to_json();
  j["run"].erase("output_dir");
  j["run"].erase("eigen_cache_dir");
  j["run"].erase("threads");
  return sha256_hex(j.dump());
}

}  // namespace qcollapse
