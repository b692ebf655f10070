#include "qcollapse/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "qcollapse/eigen_cache.hpp"
#include "qcollapse/io.hpp"
#include "qcollapse/observables.hpp"

namespace qcollapse {

namespace fs = std::filesystem;

fs::path output_root() {
  const char* env = std::getenv("QCOLLAPSE_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("out");
}

fs::path resolve_output_dir(const RunConfig& cfg) {
  if (cfg.output_dir.empty()) return output_root() / (to_string(cfg.scenario) + "-" + cfg.hash().substr(0, 12));
  const fs::path p(cfg.output_dir);
  return p.is_absolute() ? p : output_root() / p;
}

std::shared_ptr<const EigenSystem> solve_basis(const Potential& potential, const RunConfig& cfg, double mass,
                                               std::size_t n_modes) {
  EigenProblem problem{potential, build_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points), mass, n_modes,
                       cfg.grid.stencil};
  std::optional<fs::path> cache;
  if (!cfg.eigen_cache_dir.empty()) cache = fs::path(cfg.eigen_cache_dir);
  return std::make_shared<const EigenSystem>(solve_eigenproblem(problem, cache));
}

std::shared_ptr<const EigenSystem> wall_basis(const RunConfig& cfg) {
  return solve_basis(cfg.potential, cfg, cfg.mass, cfg.n_modes);
}

TwoParticleSystem two_particle_system(const RunConfig& cfg) {
  const auto& t = cfg.two_particle;
  return {solve_basis(Harmonic{t.osc1.k, t.osc1.c}, cfg, t.osc1.m, cfg.n_modes),
          solve_basis(Harmonic{t.osc2.k, t.osc2.c}, cfg, t.osc2.m, cfg.n_modes), t.osc1, t.osc2};
}

std::vector<std::size_t> snapshot_steps(const RunConfig& cfg) {
  std::vector<std::size_t> out;
  for (double t : cfg.analysis.snapshot_times) {
    const auto k = static_cast<std::size_t>(std::llround(t / cfg.dt));
    if (k <= cfg.n_steps) out.push_back(k);
  }
  return out;
}

WallRunSettings wall_settings(const RunConfig& cfg, std::shared_ptr<const EigenSystem> basis) {
  WallRunSettings s;
  s.basis = std::move(basis);
  s.initial_center = cfg.initial_center;
  s.initial_sigma = cfg.initial_sigma;
  s.dt = cfg.dt;
  s.n_steps = cfg.n_steps;
  s.max_deficit = cfg.max_deficit;
  s.decimation = cfg.decimation;
  s.postulate = cfg.postulate;
  s.capture_steps = snapshot_steps(cfg);
  return s;
}

TwoParticleSettings two_particle_settings(const RunConfig& cfg, TwoParticleSystem system) {
  TwoParticleSettings s;
  s.system = std::move(system);
  s.a0_1 = cfg.two_particle.a0_1;
  s.a0_2 = cfg.two_particle.a0_2;
  s.sigma0 = cfg.two_particle.sigma0;
  s.dt = cfg.dt;
  s.n_steps = cfg.n_steps;
  s.max_deficit = cfg.max_deficit;
  s.decimation = cfg.decimation;
  s.protocol = cfg.two_particle.protocol;
  s.capture_steps = snapshot_steps(cfg);
  return s;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

nlohmann::json EnsembleStat::to_json() const {
  return {{"mean", mean}, {"sd", sd}, {"stderr", stderr_mean}, {"p025", p025}, {"p975", p975}};
}

EnsembleStat ensemble_stat(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("ensemble_stat: no values");
  EnsembleStat s;
  const auto n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.stderr_mean = s.sd / std::sqrt(n);
  std::sort(v.begin(), v.end());
  auto pct = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.p025 = pct(0.025);
  s.p975 = pct(0.975);
  return s;
}

namespace {

// Member-order mean and standard error of equally sized vectors.
std::pair<Eigen::VectorXd, Eigen::VectorXd> mean_and_stderr(const std::vector<const Eigen::VectorXd*>& xs) {
  const auto n = static_cast<double>(xs.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(xs.front()->size());
  for (const auto* x : xs) mean += *x;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(mean.size());
  for (const auto* x : xs) var += (*x - mean).cwiseAbs2();
  Eigen::VectorXd se = Eigen::VectorXd::Zero(mean.size());
  if (xs.size() > 1) se = (var / (n - 1.0)).cwiseSqrt() / std::sqrt(n);
  return {mean, se};
}

}  // namespace

WallEnsemble run_wall_ensemble(const RunConfig& cfg, std::shared_ptr<const EigenSystem> basis) {
  WallRunSettings settings = wall_settings(cfg, basis);
  settings.decimation = cfg.n_steps;  // members keep no trajectory
  settings.capture_steps.clear();
  WallEnsemble out;
  out.members = parallel_members(cfg.ensemble_size, cfg.threads, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    const auto r = run_wall_simulation(settings, rng);
    return WallMember{r.mean_energy,
                      r.position.mean,
                      r.position.sd,
                      r.position.skewness,
                      r.position.excess_kurtosis,
                      r.events.size(),
                      count_peaks(r.position.pdf),
                      r.position.pdf,
                      r.energy_probabilities};
  });
  std::vector<const Eigen::VectorXd*> pdfs, probs;
  std::vector<double> energy, mean, sd;
  for (const auto& m : out.members) {
    pdfs.push_back(&m.pdf);
    probs.push_back(&m.probabilities);
    energy.push_back(m.mean_energy);
    mean.push_back(m.mean);
    sd.push_back(m.sd);
  }
  std::tie(out.pdf_mean, out.pdf_stderr) = mean_and_stderr(pdfs);
  std::tie(out.p_mean, out.p_stderr) = mean_and_stderr(probs);
  out.energy = ensemble_stat(energy);
  out.mean = ensemble_stat(mean);
  out.sd = ensemble_stat(sd);
  out.pooled = summarize_pdf(basis->grid, out.pdf_mean);
  return out;
}

double outward_skewness(const DistributionSummary& p1, const DistributionSummary& p2, double c1, double c2) {
  const double side = c2 >= c1 ? 1.0 : -1.0;
  return 0.5 * side * (p2.skewness - p1.skewness);
}

namespace {

TwoParticleMember summarize_member(const TwoParticleRunResult& r) {
  TwoParticleMember m{r.position1, r.position2, r.events.size(), r.skipped.size(), 0.0, 0.0};
  for (const auto& e : r.events) {
    m.max_individual_drift =
        std::max({m.max_individual_drift, std::abs(e.e1_post - e.e1_pre), std::abs(e.e2_post - e.e2_pre)});
    m.max_total_drift = std::max(m.max_total_drift, std::abs((e.e1_post + e.e2_post) - (e.e1_pre + e.e2_pre)));
  }
  return m;
}

}  // namespace

TwoParticleEnsemble run_two_particle_ensemble(const RunConfig& cfg, const TwoParticleSystem& system) {
  TwoParticleSettings settings = two_particle_settings(cfg, system);
  settings.decimation = cfg.n_steps;
  settings.capture_steps.clear();
  TwoParticleEnsemble out;
  out.members = parallel_members(cfg.ensemble_size, cfg.threads, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    return summarize_member(run_two_particle(settings, rng));
  });
  std::vector<const Eigen::VectorXd*> p1, p2;
  std::vector<double> skew, sep;
  const double c1 = system.osc1.c, c2 = system.osc2.c;
  for (const auto& m : out.members) {
    p1.push_back(&m.position1.pdf);
    p2.push_back(&m.position2.pdf);
    skew.push_back(outward_skewness(m.position1, m.position2, c1, c2));
    sep.push_back(std::abs(m.position2.mean - m.position1.mean));
  }
  std::tie(out.pdf1_mean, out.pdf1_stderr) = mean_and_stderr(p1);
  std::tie(out.pdf2_mean, out.pdf2_stderr) = mean_and_stderr(p2);
  out.pooled1 = summarize_pdf(system.basis1->grid, out.pdf1_mean);
  out.pooled2 = summarize_pdf(system.basis2->grid, out.pdf2_mean);
  out.outward_skewness = ensemble_stat(skew);
  out.separation = ensemble_stat(sep);
  return out;
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

namespace {

nlohmann::json moments_json(const DistributionSummary& d) {
  return {{"mean", d.mean},
          {"sd", d.sd},
          {"skewness", d.skewness},
          {"excess_kurtosis", d.excess_kurtosis},
          {"peaks", count_peaks(d.pdf)},
          {"peak_heights", peak_heights(d.pdf)}};
}

void write_pdf(const fs::path& file, const SpatialGrid& g, const Eigen::VectorXd& pdf) {
  CsvWriter w(file, {"x", "pdf"});
  for (std::size_t i = 0; i < g.size(); ++i) w.row(g.x(i), pdf[static_cast<Eigen::Index>(i)]);
}

void write_series(const fs::path& file, std::string_view column, const TimeSeries& ts) {
  CsvWriter w(file, {"t", column});
  for (std::size_t k = 0; k < ts.size(); ++k) w.row(ts.t[k], ts.values[k]);
}

std::string indexed(const std::string& stem, std::size_t i) {
  const std::string digits = std::to_string(i);
  return stem + std::string(digits.size() < 2 ? 2 - digits.size() : 0, '0') + digits + ".csv";
}

nlohmann::json write_wall_single(const RunConfig& cfg, const std::shared_ptr<const EigenSystem>& basis,
                                 const fs::path& dir) {
  const auto settings = wall_settings(cfg, basis);
  Rng rng(cfg.seed, 0);
  const auto r = run_wall_simulation(settings, rng);
  const auto& g = basis->grid;

  write_series(dir / "overlap.csv", "overlap", r.overlap);
  {
    const auto sp = spectrum(r.overlap, cfg.analysis.window);
    CsvWriter w(dir / "spectrum.csv", {"f", "amplitude"});
    for (std::size_t k = 0; k < sp.frequency.size(); ++k) w.row(sp.frequency[k], sp.amplitude[k]);
  }
  {
    CsvWriter w(dir / "eigenvalues.csv", {"n", "E_n", "P(E_n)"});
    for (Eigen::Index n = 0; n < basis->energies.size(); ++n)
      w.row(static_cast<std::size_t>(n), basis->energies[n], r.energy_probabilities[n]);
  }
  write_pdf(dir / "position_pdf.csv", g, r.position.pdf);
  {
    CsvWriter w(dir / "energy_trace.csv", {"t", "energy", "beyond_mass"});
    for (std::size_t k = 0; k < r.energy_trace.size(); ++k) w.row(r.overlap.t[k], r.energy_trace[k], r.beyond_trace[k]);
  }
  if (cfg.postulate) {
    CsvWriter w(dir / "events.csv", {"step", "t", "location", "pre_E", "post_E", "threshold", "beyond_mass", "post_deficit"});
    for (const auto& e : r.events)
      w.row(e.step_index, e.time, e.location, e.pre_energy, e.post_energy, e.threshold_used, e.beyond_mass,
            e.post_deficit);
  }

  nlohmann::json snaps = nlohmann::json::array();
  {
    CsvWriter dens(dir / "density_snapshots.csv", {"t", "x", "density"});
    for (std::size_t i = 0; i < r.captured.size(); ++i) {
      const double t = static_cast<double>(settings.capture_steps[i]) * cfg.dt;
      const auto rec = to_position(r.captured[i]);
      const Eigen::VectorXd rho = rec.psi.density();
      for (std::size_t j = 0; j < g.size(); ++j) dens.row(t, g.x(j), rho[static_cast<Eigen::Index>(j)]);

      const auto field = wigner(rec.psi, cfg.analysis.p_count, cfg.analysis.p_max);
      const std::string name = indexed("wigner_t", i);
      CsvWriter w(dir / name, {"x", "p", "W"});
      for (std::size_t j = 0; j < g.size(); j += cfg.analysis.wigner_x_stride)
        for (Eigen::Index q = 0; q < field.p.size(); ++q)
          w.row(g.x(j), field.p[q], field.values(static_cast<Eigen::Index>(j), q));
      snaps.push_back({{"index", i},
                       {"step", settings.capture_steps[i]},
                       {"t", t},
                       {"wigner_file", name},
                       {"wigner_integral", field.integral()},
                       {"wigner_min", field.values.minCoeff()},
                       {"max_imaginary", field.max_imaginary},
                       {"renormalization", rec.renormalization}});
    }
  }

  nlohmann::json summary{{"scenario", to_string(cfg.scenario)},
                         {"initial_energy", r.initial_energy},
                         {"initial_deficit", r.initial_deficit},
                         {"mean_energy", r.mean_energy},
                         {"energy_probability_sum", r.energy_probabilities.sum()},
                         {"position", moments_json(r.position)},
                         {"n_events", r.events.size()},
                         {"snapshots", snaps}};
  if (cfg.analysis.chaos_nc > 0) {
    Rng chaos_rng(cfg.seed, kChaosTestStream);
    const auto k = zero_one_chaos_test(r.overlap.values, cfg.analysis.chaos_nc, chaos_rng);
    summary["chaos_test"] = {{"k_median", k.k_median}, {"n_c", cfg.analysis.chaos_nc}};
  }
  return summary;
}

nlohmann::json write_wall_ensemble(const RunConfig& cfg, const std::shared_ptr<const EigenSystem>& basis,
                                   const fs::path& dir) {
  const auto ens = run_wall_ensemble(cfg, basis);
  const auto& g = basis->grid;
  {
    CsvWriter w(dir / "members.csv",
                {"member", "mean_energy", "mean", "sd", "skewness", "excess_kurtosis", "n_events", "peaks"});
    for (std::size_t i = 0; i < ens.members.size(); ++i) {
      const auto& m = ens.members[i];
      w.row(i, m.mean_energy, m.mean, m.sd, m.skewness, m.excess_kurtosis, m.n_events, m.peaks);
    }
  }
  {
    CsvWriter w(dir / "energy_probabilities.csv", {"n", "E_n", "P_mean", "P_stderr"});
    CsvWriter e(dir / "eigenvalues.csv", {"n", "E_n", "P(E_n)"});
    for (Eigen::Index n = 0; n < basis->energies.size(); ++n) {
      w.row(static_cast<std::size_t>(n), basis->energies[n], ens.p_mean[n], ens.p_stderr[n]);
      e.row(static_cast<std::size_t>(n), basis->energies[n], ens.p_mean[n]);
    }
  }
  {
    CsvWriter w(dir / "position_pdf.csv", {"x", "pdf", "pdf_stderr"});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      w.row(g.x(i), ens.pdf_mean[j], ens.pdf_stderr[j]);
    }
  }
  return {{"scenario", to_string(cfg.scenario)},
          {"ensemble_size", ens.members.size()},
          {"mean_energy", ens.energy.to_json()},
          {"position_mean", ens.mean.to_json()},
          {"position_sd", ens.sd.to_json()},
          {"pooled_position", moments_json(ens.pooled)}};
}

nlohmann::json write_two_particle_single(const RunConfig& cfg, const TwoParticleSystem& sys, const fs::path& dir) {
  const auto settings = two_particle_settings(cfg, sys);
  Rng rng(cfg.seed, 0);
  const auto r = run_two_particle(settings, rng);
  const auto& g = sys.basis1->grid;
  {
    CsvWriter w(dir / "energy_trace.csv", {"t", "e1", "e2", "e_total"});
    for (std::size_t k = 0; k < r.e1.size(); ++k) w.row(r.e1.t[k], r.e1.values[k], r.e2.values[k], r.e1.values[k] + r.e2.values[k]);
  }
  {
    CsvWriter w(dir / "events.csv", {"step", "t", "a", "e1_pre", "e1_post", "e2_pre", "e2_post", "protocol", "sigma1",
                                     "sigma2", "attempts"});
    for (const auto& e : r.events)
      w.row(e.step_index, e.time, e.a, e.e1_pre, e.e1_post, e.e2_pre, e.e2_post, to_string(e.protocol), e.sigma1,
            e.sigma2, e.attempts);
  }
  {
    CsvWriter w(dir / "skipped.csv", {"step", "t", "reason"});
    for (const auto& s : r.skipped) w.row(s.step_index, s.time, s.reason);
  }
  if (settings.protocol.kind != ProtocolKind::None) {
    CsvWriter w(dir / "overlap.csv", {"t", "overlap"});
    for (std::size_t k = 0; k < r.overlap.size(); ++k) w.row(r.e1.t[k], r.overlap[k]);
  }
  {
    CsvWriter w(dir / "position_pdf.csv", {"x", "pdf1", "pdf2"});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      w.row(g.x(i), r.position1.pdf[j], r.position2.pdf[j]);
    }
  }
  {
    CsvWriter w(dir / "density_snapshots.csv", {"t", "x", "density1", "density2"});
    for (std::size_t i = 0; i < r.captured.size(); ++i) {
      const double t = static_cast<double>(settings.capture_steps[i]) * cfg.dt;
      const Eigen::VectorXd d1 = to_position(r.captured[i].psi1).psi.density();
      const Eigen::VectorXd d2 = to_position(r.captured[i].psi2).psi.density();
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto q = static_cast<Eigen::Index>(j);
        w.row(t, g.x(j), d1[q], d2[q]);
      }
    }
  }
  const auto m = summarize_member(r);
  return {{"scenario", to_string(cfg.scenario)},
          {"protocol", to_string(settings.protocol.kind)},
          {"initial_energy", {r.e1.values.front(), r.e2.values.front()}},
          {"initial_deficit", {r.initial_deficit1, r.initial_deficit2}},
          {"n_events", m.n_events},
          {"n_skipped", m.n_skipped},
          {"max_individual_drift", m.max_individual_drift},
          {"max_total_drift", m.max_total_drift},
          {"position1", moments_json(r.position1)},
          {"position2", moments_json(r.position2)},
          {"outward_skewness", outward_skewness(r.position1, r.position2, sys.osc1.c, sys.osc2.c)},
          {"separation", std::abs(r.position2.mean - r.position1.mean)}};
}

nlohmann::json write_two_particle_ensemble(const RunConfig& cfg, const TwoParticleSystem& sys, const fs::path& dir) {
  const auto ens = run_two_particle_ensemble(cfg, sys);
  const auto& g = sys.basis1->grid;
  double max_ind = 0.0, max_tot = 0.0;
  {
    CsvWriter w(dir / "members.csv", {"member", "mean1", "sd1", "skewness1", "excess_kurtosis1", "mean2", "sd2",
                                      "skewness2", "excess_kurtosis2", "n_events", "n_skipped"});
    for (std::size_t i = 0; i < ens.members.size(); ++i) {
      const auto& m = ens.members[i];
      max_ind = std::max(max_ind, m.max_individual_drift);
      max_tot = std::max(max_tot, m.max_total_drift);
      w.row(i, m.position1.mean, m.position1.sd, m.position1.skewness, m.position1.excess_kurtosis, m.position2.mean,
            m.position2.sd, m.position2.skewness, m.position2.excess_kurtosis, m.n_events, m.n_skipped);
    }
  }
  {
    CsvWriter w(dir / "position_pdf.csv", {"x", "pdf1", "pdf1_stderr", "pdf2", "pdf2_stderr"});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      w.row(g.x(i), ens.pdf1_mean[j], ens.pdf1_stderr[j], ens.pdf2_mean[j], ens.pdf2_stderr[j]);
    }
  }
  return {{"scenario", to_string(cfg.scenario)},
          {"protocol", to_string(cfg.two_particle.protocol.kind)},
          {"ensemble_size", ens.members.size()},
          {"pooled_position1", moments_json(ens.pooled1)},
          {"pooled_position2", moments_json(ens.pooled2)},
          {"outward_skewness", ens.outward_skewness.to_json()},
          {"separation", ens.separation.to_json()},
          {"max_individual_drift", max_ind},
          {"max_total_drift", max_tot}};
}

void write_json(const fs::path& file, const nlohmann::json& j) { write_text_file(file, j.dump(2) + "\n"); }

}  // namespace

// ---------------------------------------------------------------------------
// Manifest and dispatch
// ---------------------------------------------------------------------------

nlohmann::json RunManifest::to_json() const {
  return {{"config_hash", config_hash},
          {"seed", seed},
          {"version", version},
          {"config", config},
          {"checksums", checksums}};
}

RunManifest write_manifest(const fs::path& dir, const RunConfig& cfg) {
  RunManifest m{cfg.hash(), cfg.seed, kVersion, cfg.to_json(), {}};
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    m.checksums[rel] = sha256_file(entry.path());
  }
  write_json(dir / "manifest.json", m.to_json());
  return m;
}

RunManifest run(const RunConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  fs::create_directories(out_dir);
  nlohmann::json summary;
  if (cfg.scenario == Scenario::TwoParticle) {
    const auto sys = two_particle_system(cfg);
    summary = cfg.ensemble_size > 1 ? write_two_particle_ensemble(cfg, sys, out_dir)
                                    : write_two_particle_single(cfg, sys, out_dir);
  } else {
    const auto basis = wall_basis(cfg);
    summary = cfg.ensemble_size > 1 ? write_wall_ensemble(cfg, basis, out_dir) : write_wall_single(cfg, basis, out_dir);
  }
  write_json(out_dir / "summary.json", summary);
  return write_manifest(out_dir, cfg);
}

RunManifest run(const RunConfig& cfg) { return run(cfg, resolve_output_dir(cfg)); }

RunManifest write_eigen_dump(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.scenario == Scenario::TwoParticle) throw ConfigError("run.scenario", "eigen applies to wall scenarios");
  fs::create_directories(out_dir);
  const auto basis = solve_basis(cfg.potential, cfg, cfg.mass, cfg.analysis.eigen_count);
  const double k = std::holds_alternative<SoftImpact>(cfg.potential) ? std::get<SoftImpact>(cfg.potential).k1
                                                                       : std::get<Harmonic>(cfg.potential).k;
  const double omega = std::sqrt(k / cfg.mass);
  CsvWriter w(out_dir / "eigenvalues.csv", {"n", "E_n", "E_harmonic"});
  for (Eigen::Index n = 0; n < basis->energies.size(); ++n)
    w.row(static_cast<std::size_t>(n), basis->energies[n], kHbar * omega * (static_cast<double>(n) + 0.5));
  return write_manifest(out_dir, cfg);
}

RunManifest write_curves(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto& cv = cfg.curves;
  {
    CsvWriter w(out_dir / "curves.csv", {"epsilon", "a", "sigma_small", "sigma_large"});
    for (double eps : cv.energies) {
      const auto dom = allowed_domain(eps, cv.osc);
      if (!dom) continue;
      for (std::size_t i = 0; i < cv.a_points; ++i) {
        const double a = dom->lo + dom->width() * static_cast<double>(i) / static_cast<double>(cv.a_points - 1);
        const auto roots = variance_roots(eps, a, cv.osc);
        if (roots.empty()) continue;
        w.row(eps, a, std::sqrt(roots.front()), std::sqrt(roots.back()));
      }
    }
  }
  return write_manifest(out_dir, cfg);
}

}  // namespace qcollapse
