#include "qcollapse/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcollapse/grid.hpp"

namespace qcollapse {

double OscillatorSpec::omega() const { return std::sqrt(k / m); }

double OscillatorSpec::ground_energy() const { return 0.5 * kHbar * omega(); }

void OscillatorSpec::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("oscillator: mass must be > 0");
  if (!(k > 0.0)) throw std::invalid_argument("oscillator: stiffness must be > 0");
  if (!std::isfinite(c)) throw std::invalid_argument("oscillator: centre must be finite");
}

double expected_energy_gaussian(const GaussianPacket& g, const OscillatorSpec& o) {
  o.validate();
  if (!(g.sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be > 0");
  const double s2 = g.sigma * g.sigma;
  const double d = g.a - o.c;
  return 0.5 * o.k * (s2 + d * d + kHbar * kHbar / (4.0 * o.m * o.k * s2));
}

std::vector<double> variance_roots(double epsilon, double a, const OscillatorSpec& o) {
  o.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("variance_roots: epsilon must be > 0");
  const double d = a - o.c;
  const double b = 2.0 * epsilon / o.k - d * d;
  const double q = kHbar * kHbar / (o.m * o.k);  // B^2 - q is the discriminant
  if (b <= 0.0) return {};
  const double disc = b * b - q;
  if (std::abs(disc) < 1e-12) return {0.5 * b};
  if (disc < 0.0) return {};
  // Product of the roots is q/4; take the small one from the large one to
  // avoid cancellation.
  const double large = 0.5 * (b + std::sqrt(disc));
  const double small = 0.25 * q / large;
  return {small, large};
}

std::optional<Interval> allowed_domain(double epsilon, const OscillatorSpec& o) {
  o.validate();
  const double r2 = 2.0 * epsilon / o.k - kHbar / std::sqrt(o.m * o.k);
  if (r2 < 0.0) return std::nullopt;
  const double r = std::sqrt(r2);
  return Interval{o.c - r, o.c + r};
}

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

double minimum_energy_at(double a, const OscillatorSpec& o) {
  o.validate();
  const double d = a - o.c;
  return 0.5 * o.k * (d * d + kHbar / std::sqrt(o.m * o.k));
}

std::pair<double, double> partition_energy(double total, const OscillatorSpec& o1, const OscillatorSpec& o2,
                                           Rng& rng) {
  o1.validate();
  o2.validate();
  const double lo = o1.ground_energy();
  const double hi = total - o2.ground_energy();
  if (hi < lo) throw std::domain_error("partition_energy: total below the sum of ground-state energies");
  const double e1 = hi == lo ? lo : rng.uniform(lo, hi);
  return {e1, total - e1};
}

std::optional<std::pair<double, double>> partition_energy_floored(double total, double lower1, double lower2,
                                                                  Rng& rng) {
  const double lo = lower1;
  const double hi = total - lower2;
  if (hi < lo) return std::nullopt;
  const double e1 = hi == lo ? lo : rng.uniform(lo, hi);
  return std::pair{e1, total - e1};
}

}  // namespace qcollapse
