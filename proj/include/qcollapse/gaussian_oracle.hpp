#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qcollapse/rng.hpp"

namespace qcollapse {

/// Gaussian wavepacket centred at `a`; `sigma` is the position SD of |psi|^2.
struct GaussianPacket {
  double a = 0.0;
  double sigma = 1.0;
};

/// Harmonic well k (x - c)^2 / 2 for a particle of mass m.
struct OscillatorSpec {
  double m = 1.0;
  double k = 1.0;
  double c = 0.0;

  double omega() const;
  /// hbar omega / 2
  double ground_energy() const;
  /// Throws std::invalid_argument unless m > 0 and k > 0.
  void validate() const;
};

/// <E> = (k/2) [sigma^2 + (a - c)^2 + hbar^2 / (4 m k sigma^2)].
double expected_energy_gaussian(const GaussianPacket& g, const OscillatorSpec& o);

/// Positive sigma^2 values with expected energy `epsilon` at centre `a`,
/// ascending. Roots of sigma^4 - B sigma^2 + hbar^2/(4mk) = 0 with
/// B = 2 epsilon / k - (a - c)^2. A discriminant within 1e-12 of zero is a
/// double root (one value). Empty when infeasible.
std::vector<double> variance_roots(double epsilon, double a, const OscillatorSpec& o);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Centres a for which variance_roots(epsilon, a) is non-empty:
/// [c - R, c + R] with R = sqrt(2 epsilon / k - hbar / sqrt(m k)).
/// nullopt when epsilon is below the ground-state energy.
std::optional<Interval> allowed_domain(double epsilon, const OscillatorSpec& o);

std::optional<Interval> intersect(const Interval& a, const Interval& b);

/// Smallest energy a Gaussian centred at `a` can carry:
/// (k/2) [(a - c)^2 + hbar / sqrt(m k)].
double minimum_energy_at(double a, const OscillatorSpec& o);

/// eps1 ~ U[hbar w1/2, total - hbar w2/2], eps2 = total - eps1. Throws
/// std::domain_error when total is below the sum of ground energies.
std::pair<double, double> partition_energy(double total, const OscillatorSpec& o1, const OscillatorSpec& o2,
                                           Rng& rng);

/// Same rule with eps_i additionally floored at lower_i (e.g. the
/// minimum_energy_at a collapse centre). nullopt if the range is empty.
std::optional<std::pair<double, double>> partition_energy_floored(double total, double lower1, double lower2,
                                                                  Rng& rng);

}  // namespace qcollapse
