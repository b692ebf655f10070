#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "qcollapse/config.hpp"
#include "qcollapse/detail/parallel.hpp"
#include "qcollapse/eigensolver.hpp"
#include "qcollapse/two_particle.hpp"
#include "qcollapse/wall_collapse.hpp"

namespace qcollapse {

/// $QCOLLAPSE_OUTPUT_ROOT, or "out" when unset.
std::filesystem::path output_root();

/// Absolute run.output_dir as is; relative ones go under output_root(); an
/// empty one becomes output_root()/<scenario>-<first 12 hash digits>.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::shared_ptr<const EigenSystem> solve_basis(const Potential& potential, const RunConfig& cfg, double mass,
                                               std::size_t n_modes);
/// Basis of the single-particle (wall) scenarios.
std::shared_ptr<const EigenSystem> wall_basis(const RunConfig& cfg);
TwoParticleSystem two_particle_system(const RunConfig& cfg);

WallRunSettings wall_settings(const RunConfig& cfg, std::shared_ptr<const EigenSystem> basis);
TwoParticleSettings two_particle_settings(const RunConfig& cfg, TwoParticleSystem system);

/// Snapshot times rounded to the nearest step, dropping those past n_steps.
std::vector<std::size_t> snapshot_steps(const RunConfig& cfg);

/// Summary of per-member values. The interval [p025, p975] is the central
/// 95% range of the members (linear-interpolated percentiles).
struct EnsembleStat {
  double mean = 0.0;
  double sd = 0.0;
  double stderr_mean = 0.0;
  double p025 = 0.0;
  double p975 = 0.0;

  bool covers(double x) const { return x >= p025 && x <= p975; }
  nlohmann::json to_json() const;
};
EnsembleStat ensemble_stat(std::vector<double> values);

struct WallMember {
  double mean_energy = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::size_t n_events = 0;
  std::size_t peaks = 0;
  Eigen::VectorXd pdf;
  Eigen::VectorXd probabilities;
};

struct WallEnsemble {
  std::vector<WallMember> members;
  Eigen::VectorXd pdf_mean, pdf_stderr;
  Eigen::VectorXd p_mean, p_stderr;
  EnsembleStat energy, mean, sd;
  /// Moments of the member-averaged PDF.
  DistributionSummary pooled;
};

/// Member i runs on Rng(cfg.seed, i); reductions run in member order.
WallEnsemble run_wall_ensemble(const RunConfig& cfg, std::shared_ptr<const EigenSystem> basis);

struct TwoParticleMember {
  DistributionSummary position1, position2;
  std::size_t n_events = 0;
  std::size_t n_skipped = 0;
  double max_individual_drift = 0.0;  // max |e_i post - e_i pre|
  double max_total_drift = 0.0;       // max |total post - total pre|
};

struct TwoParticleEnsemble {
  std::vector<TwoParticleMember> members;
  Eigen::VectorXd pdf1_mean, pdf1_stderr, pdf2_mean, pdf2_stderr;
  DistributionSummary pooled1, pooled2;
  EnsembleStat outward_skewness;  // per member, see outward_skewness()
  EnsembleStat separation;        // per member, |mean2 - mean1|
};

/// Skewness of each density measured toward the side facing away from the
/// other well, averaged over the two particles. Positive when both tails
/// point outward.
double outward_skewness(const DistributionSummary& p1, const DistributionSummary& p2, double c1, double c2);

TwoParticleEnsemble run_two_particle_ensemble(const RunConfig& cfg, const TwoParticleSystem& system);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  nlohmann::json config;
  std::map<std::string, std::string> checksums;  // file name -> sha256

  nlohmann::json to_json() const;
};

/// Hashes every regular file in `dir` (recursively, except manifest.json)
/// and writes manifest.json.
RunManifest write_manifest(const std::filesystem::path& dir, const RunConfig& cfg);

/// Dispatches on the scenario, writes all outputs into `out_dir` and
/// returns the manifest.
RunManifest run(const RunConfig& cfg, const std::filesystem::path& out_dir);
RunManifest run(const RunConfig& cfg);

/// eigenvalues.csv (n, E_n, E_harmonic) for analysis.eigen_count modes of
/// the wall potential, plus a manifest.
RunManifest write_eigen_dump(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// curves.csv (epsilon, a, sigma_small, sigma_large) over the allowed domain
/// of each curves.energies entry, plus a manifest.
RunManifest write_curves(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qcollapse
