#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qcollapse/gaussian_oracle.hpp"
#include "qcollapse/grid.hpp"
#include "qcollapse/observables.hpp"
#include "qcollapse/propagator.hpp"
#include "qcollapse/two_particle.hpp"
#include "qcollapse/wall_collapse.hpp"

namespace qcollapse {

inline constexpr const char* kVersion = "0.1.0";

/// Rejected configuration; `key()` is the dotted path ("run.dt") or empty
/// when the problem is not tied to one key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Scenario { WallUnitary, WallCollapse, TwoParticle };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct GridSpec {
  double x_min = -30.0;
  double x_max = 30.0;
  std::size_t n_points = 1501;
  KineticStencil stencil = KineticStencil::FourthOrder;
};

struct TwoParticleSpec {
  OscillatorSpec osc1{1.0, 1.0, -2.0};
  OscillatorSpec osc2{1.0, 1.0, 2.0};
  double a0_1 = -5.0;
  double a0_2 = 5.0;
  double sigma0 = 1.0;
  CollapseProtocol protocol;
};

struct AnalysisSpec {
  std::vector<double> snapshot_times{0.0, 2.0, 4.0, 6.0};
  std::size_t p_count = 400;
  double p_max = 10.0;
  /// Wigner rows are written for every `wigner_x_stride`-th grid point.
  std::size_t wigner_x_stride = 5;
  /// Frequencies for the 0-1 test; 0 disables it.
  std::size_t chaos_nc = 100;
  SpectrumWindow window = SpectrumWindow::Rectangular;
  /// Eigenvalues listed by the `eigen` subcommand.
  std::size_t eigen_count = 250;
};

/// Constant-energy curves of a Gaussian in one harmonic well.
struct CurvesSpec {
  OscillatorSpec osc{1.0, 1.0, -2.0};
  std::vector<double> energies{1.0, 2.0, 4.0, 8.0};
  std::size_t a_points = 401;
};

struct RunConfig {
  Scenario scenario = Scenario::WallUnitary;
  std::uint64_t seed = 0;
  std::size_t ensemble_size = 1;
  /// Worker threads for ensembles; 0 picks the hardware count. Results do
  /// not depend on it.
  std::size_t threads = 0;
  double dt = 0.1;
  std::size_t n_steps = 10000;
  std::size_t n_modes = 150;
  double max_deficit = kDefaultMaxDeficit;
  std::size_t decimation = 10;
  std::string output_dir;
  std::string eigen_cache_dir;

  GridSpec grid;
  double mass = 1.0;
  Potential potential = SoftImpact{1.0, 10.0, 5.0};
  double initial_center = -5.0;
  double initial_sigma = 1.0;
  std::optional<WallPostulate> postulate;  // set iff scenario == WallCollapse
  TwoParticleSpec two_particle;
  AnalysisSpec analysis;
  CurvesSpec curves;

  /// Every resolved value, defaults included, with sorted keys.
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON of the result-affecting fields (all but
  /// output_dir, eigen_cache_dir and threads).
  std::string hash() const;
};

/// INI text: `[section]` headers and `key = value` lines; `;` or `#` start
/// a comment line. Throws ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Checks cross-field invariants; parse_config calls it.
void validate(const RunConfig& cfg);

}  // namespace qcollapse
