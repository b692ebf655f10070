#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qcollapse/observables.hpp"
#include "qcollapse/propagator.hpp"
#include "qcollapse/rng.hpp"

namespace qcollapse {

enum class WallPostulateKind { P1, P2, P3, P4 };

/// When P2/P4 draw a fresh threshold r ~ U(0,1).
enum class ThresholdRedraw { PerCheck, PerCollapse };

/// Which part of |psi|^2 P3/P4 sample the collapse point from.
enum class LocationSampling { Full, BeyondWall };

struct WallPostulate {
  WallPostulateKind kind = WallPostulateKind::P1;
  double r = 0.5;              // used by P1/P3
  double sigma_post = 0.25;
  double wall = 5.0;
  ThresholdRedraw redraw = ThresholdRedraw::PerCollapse;
  LocationSampling sampling = LocationSampling::Full;
  /// Unitary steps that must elapse after a collapse before the next check.
  std::size_t refractory_steps = 1;

  bool random_threshold() const { return kind == WallPostulateKind::P2 || kind == WallPostulateKind::P4; }
  bool samples_location() const { return kind == WallPostulateKind::P3 || kind == WallPostulateKind::P4; }
  void validate() const;
};

std::string to_string(WallPostulateKind k);
WallPostulateKind postulate_from_string(const std::string& s);
std::string to_string(ThresholdRedraw r);
ThresholdRedraw redraw_from_string(const std::string& s);
std::string to_string(LocationSampling s);
LocationSampling sampling_from_string(const std::string& s);

struct CollapseEvent {
  std::size_t step_index = 0;
  double time = 0.0;
  double location = 0.0;
  double pre_energy = 0.0;
  double post_energy = 0.0;
  double threshold_used = 0.0;
  double beyond_mass = 0.0;
  double post_deficit = 0.0;
};

/// sum over grid points with x_i >= x_wall of |psi_i|^2 dx. Points within
/// 1e-9 dx of the wall count as beyond it.
double beyond_wall_probability(const Wavefunction& psi, double x_wall);

/// Inverse-CDF draw of a grid index from non-negative weights; u in [0,1).
std::size_t sample_index(const Eigen::VectorXd& weights, double u);

/// Normalized Gaussian of width `sigma` at `center`, projected onto the basis
/// and renormalized there.
SpectralState collapsed_packet(std::shared_ptr<const EigenSystem> basis, double center, double sigma);

struct WallCollapse {
  SpectralState state;
  CollapseEvent event;
};

/// Threshold test and collapse for one simulation. Holds the beyond-wall
/// projector in the eigenbasis and, for per-collapse redraws, the pending
/// threshold, so one instance belongs to one trajectory.
class WallCollapser {
 public:
  WallCollapser(std::shared_ptr<const EigenSystem> basis, WallPostulate postulate);

  const WallPostulate& postulate() const { return postulate_; }

  /// c^dagger M c / |c|^2, equal to beyond_wall_probability(to_position(c)).
  double beyond_mass(const Eigen::VectorXcd& c) const;

  /// Collapse if the beyond-wall mass reaches the threshold. Draws from
  /// `rng` only as the postulate requires, in a fixed order: threshold first,
  /// then location.
  std::optional<WallCollapse> check_and_collapse(const SpectralState& s, std::size_t step, double time, Rng& rng);

 private:
  double threshold(Rng& rng);

  std::shared_ptr<const EigenSystem> basis_;
  WallPostulate postulate_;
  Eigen::MatrixXd projector_;
  std::size_t first_beyond_;
  std::optional<double> pending_threshold_;
};

struct WallRunSettings {
  std::shared_ptr<const EigenSystem> basis;
  double initial_center = -5.0;
  double initial_sigma = 1.0;
  double dt = 0.1;
  std::size_t n_steps = 10000;
  double max_deficit = kDefaultMaxDeficit;
  std::size_t decimation = 10;
  std::optional<WallPostulate> postulate;  // nullopt: purely unitary
  /// Steps whose state is returned in `captured`, in this order.
  std::vector<std::size_t> capture_steps;
};

struct WallRunResult {
  std::vector<CollapseEvent> events;
  TimeSeries overlap;                    // t = 0 .. n_steps dt
  std::vector<double> energy_trace;      // <E> at t = 0 .. n_steps dt
  std::vector<double> beyond_trace;      // beyond-wall mass at t = 0 .. n_steps dt (NaN when not evaluated)
  std::vector<std::size_t> snapshot_steps;
  std::vector<SpectralState> snapshots;  // every `decimation` steps, from t = 0
  std::vector<SpectralState> captured;   // one per capture step
  Eigen::VectorXd energy_probabilities;  // mean of |c_n|^2 over steps 1..n_steps
  DistributionSummary position;          // mean of |psi|^2 over steps 1..n_steps
  double mean_energy = 0.0;              // mean of <E> over steps 1..n_steps
  double initial_energy = 0.0;
  double initial_deficit = 0.0;
};

/// Alternates evolve(dt) and the collapse check for n_steps. Deterministic
/// for a given `rng` state. Throws TruncationError if the initial packet has
/// too much weight outside the basis.
WallRunResult run_wall_simulation(const WallRunSettings& settings, Rng& rng);

}  // namespace qcollapse
