#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qcollapse/gaussian_oracle.hpp"
#include "qcollapse/observables.hpp"
#include "qcollapse/propagator.hpp"
#include "qcollapse/rng.hpp"

namespace qcollapse {

enum class ProtocolKind { None, IndividualConservation, TotalConservation };
enum class SigmaChoice { Smaller, Larger };
/// Density the common collapse point is drawn from.
enum class SamplingDensity { Product, Particle1, Particle2 };

std::string to_string(ProtocolKind p);
ProtocolKind protocol_from_string(const std::string& s);
std::string to_string(SigmaChoice s);
SigmaChoice sigma_choice_from_string(const std::string& s);
std::string to_string(SamplingDensity s);
SamplingDensity sampling_density_from_string(const std::string& s);

struct CollapseProtocol {
  ProtocolKind kind = ProtocolKind::IndividualConservation;
  SigmaChoice sigma_choice = SigmaChoice::Smaller;
  SamplingDensity sampling = SamplingDensity::Product;
  /// Trigger probability per check is clamp(lambda * overlap, 0, 1).
  double lambda = 1.0;
  /// Tune sigma so the projected state carries the target energy on the grid.
  bool refine_energy = true;
  /// Extra collapse points tried when a total-conservation partition is empty.
  std::size_t max_resample = 16;
  /// A collapse whose post energies miss their targets by more than this
  /// (packets too narrow for the grid and basis) is treated as infeasible.
  double energy_tolerance = 1e-6;
  std::size_t refractory_steps = 1;

  void validate() const;
};

struct TwoParticleSystem {
  std::shared_ptr<const EigenSystem> basis1;
  std::shared_ptr<const EigenSystem> basis2;
  OscillatorSpec osc1;
  OscillatorSpec osc2;
};

/// Product state psi1(x1) psi2(x2); e1, e2 are the expected energies.
struct TwoParticleState {
  SpectralState psi1;
  SpectralState psi2;
  double e1 = 0.0;
  double e2 = 0.0;

  static TwoParticleState from(SpectralState psi1, SpectralState psi2);
  double total() const { return e1 + e2; }
};

struct TwoParticleEvent {
  std::size_t step_index = 0;
  double time = 0.0;
  double a = 0.0;
  double e1_pre = 0.0;
  double e1_post = 0.0;
  double e2_pre = 0.0;
  double e2_post = 0.0;
  ProtocolKind protocol = ProtocolKind::None;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  /// Energies the oracle aimed for (equal to the pre energies for
  /// individual conservation, the partition draw for total conservation).
  double target1 = 0.0;
  double target2 = 0.0;
  std::size_t attempts = 1;
};

struct SkippedCollapse {
  std::size_t step_index = 0;
  double time = 0.0;
  std::string reason;
};

struct TwoParticleCollapse {
  TwoParticleState state;
  TwoParticleEvent event;

  /// Largest |post - target| over the two particles.
  double energy_miss() const;
};

/// sum |psi1_i|^2 |psi2_i|^2 dx. Throws std::invalid_argument on different grids.
double density_overlap(const Wavefunction& psi1, const Wavefunction& psi2);

/// Inverse-CDF sample of a grid point in `domain` from the chosen density.
/// nullopt if the density has no mass there.
std::optional<double> collapse_location(const Wavefunction& psi1, const Wavefunction& psi2, const Interval& domain,
                                        Rng& rng, SamplingDensity density = SamplingDensity::Product);

struct FittedGaussian {
  SpectralState state;
  double sigma = 0.0;
  double energy = 0.0;
};

/// Gaussian at `a` whose projected state carries `energy`: sigma from the
/// chosen variance root, then (optionally) tuned on the grid until the
/// spectral energy matches to ~1e-11 relative. Throws std::domain_error if
/// (energy, a) has no root.
FittedGaussian fit_gaussian(std::shared_ptr<const EigenSystem> basis, const OscillatorSpec& o, double a, double energy,
                            SigmaChoice choice, bool refine);

/// Both particles collapse at `a` keeping their own energies. Throws
/// std::domain_error if `a` is outside either allowed domain.
TwoParticleCollapse collapse_individual(const TwoParticleState& state, double a, const TwoParticleSystem& sys,
                                        const CollapseProtocol& protocol);

/// Both particles collapse at `a` after a uniform re-partition of the total
/// energy, floored so each (eps_i, a) stays feasible. nullopt if no
/// partition exists at this `a` or the drawn one is not representable
/// within protocol.energy_tolerance.
std::optional<TwoParticleCollapse> collapse_total(const TwoParticleState& state, double a,
                                                  const TwoParticleSystem& sys, const CollapseProtocol& protocol,
                                                  Rng& rng);

struct TwoParticleSettings {
  TwoParticleSystem system;
  double a0_1 = -5.0;
  double a0_2 = 5.0;
  double sigma0 = 1.0;
  double dt = 0.1;
  std::size_t n_steps = 10000;
  double max_deficit = kDefaultMaxDeficit;
  std::size_t decimation = 10;
  CollapseProtocol protocol;
  std::vector<std::size_t> capture_steps;
};

struct TwoParticleRunResult {
  std::vector<TwoParticleEvent> events;
  std::vector<SkippedCollapse> skipped;
  TimeSeries e1, e2;              // t = 0 .. n_steps dt
  std::vector<double> overlap;    // density overlap at t = 0 .. n_steps dt (NaN when not evaluated)
  std::vector<std::size_t> snapshot_steps;
  std::vector<TwoParticleState> snapshots;
  std::vector<TwoParticleState> captured;  // one per capture step
  DistributionSummary position1;  // mean of |psi_i|^2 over steps 1..n_steps
  DistributionSummary position2;
  double initial_deficit1 = 0.0;
  double initial_deficit2 = 0.0;
};

/// Per step: evolve both particles, then with probability
/// clamp(lambda * overlap) collapse per the protocol. Deterministic per rng.
TwoParticleRunResult run_two_particle(const TwoParticleSettings& settings, Rng& rng);

}  // namespace qcollapse
