#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Core>

#include "qcollapse/eigensolver.hpp"
#include "qcollapse/grid.hpp"

namespace qcollapse {

/// Raised when a state has too much weight outside the retained eigenbasis.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double deficit) : std::runtime_error(what), deficit_(deficit) {}
  double deficit() const { return deficit_; }

 private:
  double deficit_;
};

inline constexpr double kDefaultMaxDeficit = 1e-3;

/// Complex amplitudes on a grid, normalized so that sum |psi_i|^2 dx = 1.
class Wavefunction {
 public:
  /// Normalizes `amplitudes`; throws std::invalid_argument on a zero or
  /// size-mismatched vector.
  Wavefunction(SpatialGrid grid, Eigen::VectorXcd amplitudes);

  const SpatialGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXd density() const { return amplitudes_.cwiseAbs2(); }
  double norm_squared() const { return amplitudes_.squaredNorm() * grid_.dx(); }
  /// <this|other> with dx weighting.
  std::complex<double> inner(const Wavefunction& other) const;
  double mean_position() const;

 private:
  SpatialGrid grid_;
  Eigen::VectorXcd amplitudes_;
};

/// psi(x) ~ exp(-(x - center)^2 / (4 sigma^2)); sigma is the position SD of |psi|^2.
Wavefunction gaussian_packet(const SpatialGrid& g, double center, double sigma);

/// Expansion coefficients in a shared, immutable eigenbasis.
struct SpectralState {
  std::shared_ptr<const EigenSystem> basis;
  Eigen::VectorXcd coefficients;
  /// 1 - sum |c_n|^2 at projection time.
  double deficit = 0.0;

  double weight() const { return coefficients.squaredNorm(); }
};

/// Projection without gating; `deficit` is recorded.
SpectralState project(const Wavefunction& psi, std::shared_ptr<const EigenSystem> basis);

/// Projection gated on the truncation deficit; throws TruncationError when
/// the deficit exceeds `max_deficit`.
SpectralState to_spectral(const Wavefunction& psi, std::shared_ptr<const EigenSystem> basis,
                          double max_deficit = kDefaultMaxDeficit);

/// c_n <- c_n exp(-i E_n dt / hbar). Throws on negative dt.
SpectralState evolve(const SpectralState& s, double dt);

struct Reconstruction {
  Wavefunction psi;
  /// Factor the raw sum_n c_n v_n was multiplied by to restore unit norm.
  double renormalization;
};

Reconstruction to_position(const SpectralState& s);

/// Fixed-dt stepper with the phase factors precomputed.
class StepPropagator {
 public:
  StepPropagator(const EigenSystem& basis, double dt);
  void step(Eigen::VectorXcd& coefficients) const { coefficients.array() *= phases_.array(); }
  double dt() const { return dt_; }

 private:
  double dt_;
  Eigen::VectorXcd phases_;
};

}  // namespace qcollapse
