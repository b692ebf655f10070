#include "qcollapse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qcollapse {

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_points_(n_points), dx_(0.0) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw std::invalid_argument("grid bounds must satisfy x_min < x_max");
  }
  if (n_points < 3) {
    throw std::invalid_argument("grid needs at least 3 points");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

Eigen::VectorXd SpatialGrid::positions() const {
  Eigen::VectorXd xs(static_cast<Eigen::Index>(n_points_));
  for (std::size_t i = 0; i < n_points_; ++i) xs[static_cast<Eigen::Index>(i)] = x(i);
  return xs;
}

std::size_t SpatialGrid::nearest_index(double pos) const {
  const double s = std::round((pos - x_min_) / dx_);
  if (s <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), n_points_ - 1);
}

std::size_t SpatialGrid::first_index_at_or_beyond(double pos) const {
  const double tol = 1e-9 * dx_;
  const double s = std::ceil((pos - tol - x_min_) / dx_);
  if (s <= 0.0) return 0;
  auto i = std::min(static_cast<std::size_t>(s), n_points_);
  // Guard against the ceil landing one cell off due to rounding.
  while (i > 0 && x(i - 1) >= pos - tol) --i;
  while (i < n_points_ && x(i) < pos - tol) ++i;
  return i;
}

SpatialGrid build_grid(double x_min, double x_max, std::size_t n_points) {
  return SpatialGrid(x_min, x_max, n_points);
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const Potential& p) {
  std::visit(Overloaded{
                 [](const SoftImpact& s) {
                   if (!(s.k1 > 0.0)) throw std::invalid_argument("soft impact: k1 must be > 0");
                   if (!(s.k2 >= 0.0)) throw std::invalid_argument("soft impact: k2 must be >= 0");
                   if (!std::isfinite(s.x_wall)) throw std::invalid_argument("soft impact: x_wall must be finite");
                 },
                 [](const Harmonic& h) {
                   if (!(h.k > 0.0)) throw std::invalid_argument("harmonic: k must be > 0");
                   if (!std::isfinite(h.center)) throw std::invalid_argument("harmonic: center must be finite");
                 },
             },
             p);
}

double potential_at(const Potential& p, double x) {
  return std::visit(Overloaded{
                        [x](const SoftImpact& s) {
                          double v = 0.5 * s.k1 * x * x;
                          if (x >= s.x_wall) v += 0.5 * s.k2 * (x - s.x_wall) * (x - s.x_wall);
                          return v;
                        },
                        [x](const Harmonic& h) { return 0.5 * h.k * (x - h.center) * (x - h.center); },
                    },
                    p);
}

Eigen::VectorXd evaluate_potential(const Potential& p, const SpatialGrid& g) {
  validate(p);
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v[static_cast<Eigen::Index>(i)] = potential_at(p, g.x(i));
  return v;
}

std::string describe(const Potential& p) {
  char buf[160];
  std::visit(Overloaded{
                 [&](const SoftImpact& s) {
                   std::snprintf(buf, sizeof buf, "soft_impact(k1=%a,k2=%a,x_wall=%a)", s.k1, s.k2, s.x_wall);
                 },
                 [&](const Harmonic& h) { std::snprintf(buf, sizeof buf, "harmonic(k=%a,center=%a)", h.k, h.center); },
             },
             p);
  return buf;
}

std::string to_string(KineticStencil s) {
  return s == KineticStencil::SecondOrder ? "second_order" : "fourth_order";
}

KineticStencil stencil_from_string(const std::string& s) {
  if (s == "second_order" || s == "2") return KineticStencil::SecondOrder;
  if (s == "fourth_order" || s == "4") return KineticStencil::FourthOrder;
  throw std::invalid_argument("unknown kinetic stencil '" + s + "' (expected second_order|fourth_order)");
}

double SymmetricBandMatrix::at(std::size_t i, std::size_t j) const {
  const std::size_t lo = std::min(i, j);
  const std::size_t d = std::max(i, j) - lo;
  if (d == 0) return diag[static_cast<Eigen::Index>(i)];
  if (d > off.size()) return 0.0;
  return off[d - 1][static_cast<Eigen::Index>(lo)];
}

Eigen::VectorXd SymmetricBandMatrix::apply(const Eigen::VectorXd& v) const {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd out = diag.cwiseProduct(v);
  for (std::size_t d = 1; d <= off.size(); ++d) {
    const auto& e = off[d - 1];
    const auto di = static_cast<Eigen::Index>(d);
    for (Eigen::Index i = 0; i + di < n; ++i) {
      out[i] += e[i] * v[i + di];
      out[i + di] += e[i] * v[i];
    }
  }
  return out;
}

double SymmetricBandMatrix::inf_norm() const {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd rows = diag.cwiseAbs();
  for (std::size_t d = 1; d <= off.size(); ++d) {
    const auto di = static_cast<Eigen::Index>(d);
    for (Eigen::Index i = 0; i + di < n; ++i) {
      rows[i] += std::abs(off[d - 1][i]);
      rows[i + di] += std::abs(off[d - 1][i]);
    }
  }
  return rows.maxCoeff();
}

SymmetricBandMatrix discretize_hamiltonian(const Potential& p, const SpatialGrid& g, double mass,
                                           KineticStencil stencil) {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be > 0");
  const Eigen::VectorXd v = evaluate_potential(p, g);
  const auto n = static_cast<Eigen::Index>(g.size());
  // Kinetic prefactor hbar^2 / (2 m dx^2).
  const double t = kHbar * kHbar / (2.0 * mass * g.dx() * g.dx());

  SymmetricBandMatrix h;
  if (stencil == KineticStencil::SecondOrder) {
    // -psi'' ~ (-psi[i-1] + 2 psi[i] - psi[i+1]) / dx^2
    h.diag = v.array() + 2.0 * t;
    h.off.push_back(Eigen::VectorXd::Constant(n - 1, -t));
  } else {
    // -psi'' ~ (psi[i-2] - 16 psi[i-1] + 30 psi[i] - 16 psi[i+1] + psi[i+2]) / (12 dx^2)
    h.diag = v.array() + t * 30.0 / 12.0;
    h.off.push_back(Eigen::VectorXd::Constant(n - 1, -t * 16.0 / 12.0));
    h.off.push_back(Eigen::VectorXd::Constant(n - 2, t / 12.0));
  }
  return h;
}

}  // namespace qcollapse
