#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace qcollapse {

/// Natural units throughout: hbar = 1.
inline constexpr double kHbar = 1.0;

/// Uniform 1-D grid. Point i sits at x_min + i*dx; the last point is x_max.
class SpatialGrid {
 public:
  SpatialGrid(double x_min, double x_max, std::size_t n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_points_; }
  double dx() const { return dx_; }

  double x(std::size_t i) const {
    return i + 1 == n_points_ ? x_max_ : x_min_ + static_cast<double>(i) * dx_;
  }
  Eigen::VectorXd positions() const;

  /// Index of the grid point nearest to `pos`, clamped to the grid.
  std::size_t nearest_index(double pos) const;
  /// First index whose position is >= pos (points within 1e-9*dx count as equal).
  std::size_t first_index_at_or_beyond(double pos) const;
  bool contains(double pos) const { return pos >= x_min_ && pos <= x_max_; }

  bool operator==(const SpatialGrid&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double dx_;
};

SpatialGrid build_grid(double x_min, double x_max, std::size_t n_points);

/// Harmonic well with a spring-cushioned wall:
/// V = k1 x^2/2 for x <= x_wall, plus k2 (x - x_wall)^2/2 beyond it.
struct SoftImpact {
  double k1 = 1.0;
  double k2 = 10.0;
  double x_wall = 5.0;
};

/// V = k (x - center)^2 / 2.
struct Harmonic {
  double k = 1.0;
  double center = 0.0;
};

using Potential = std::variant<SoftImpact, Harmonic>;

/// Throws std::invalid_argument when stiffnesses are out of range.
void validate(const Potential& p);
double potential_at(const Potential& p, double x);
Eigen::VectorXd evaluate_potential(const Potential& p, const SpatialGrid& g);
/// Stable textual form, used for cache keys and manifests.
std::string describe(const Potential& p);

enum class KineticStencil { SecondOrder, FourthOrder };

std::string to_string(KineticStencil s);
KineticStencil stencil_from_string(const std::string& s);

/// Real symmetric banded matrix. off[d-1][i] holds A(i+d, i).
struct SymmetricBandMatrix {
  Eigen::VectorXd diag;
  std::vector<Eigen::VectorXd> off;

  std::size_t size() const { return static_cast<std::size_t>(diag.size()); }
  std::size_t bandwidth() const { return off.size(); }
  double at(std::size_t i, std::size_t j) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// Max absolute row sum; bounds the spectral radius.
  double inf_norm() const;
};

/// Finite-difference Hamiltonian -hbar^2/(2m) d^2/dx^2 + V with Dirichlet
/// boundaries. SecondOrder yields a tridiagonal matrix, FourthOrder a
/// pentadiagonal one.
SymmetricBandMatrix discretize_hamiltonian(const Potential& p, const SpatialGrid& g, double mass,
                                           KineticStencil stencil = KineticStencil::FourthOrder);

}  // namespace qcollapse
