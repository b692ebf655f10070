#include "qcollapse/propagator.hpp"

#include <cmath>
#include <string>

namespace qcollapse {

Wavefunction::Wavefunction(SpatialGrid grid, Eigen::VectorXcd amplitudes)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != grid_.size()) {
    throw std::invalid_argument("wavefunction: amplitude count does not match grid");
  }
  const double n2 = amplitudes_.squaredNorm() * grid_.dx();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("wavefunction: zero or non-finite norm");
  amplitudes_ /= std::sqrt(n2);
}

std::complex<double> Wavefunction::inner(const Wavefunction& other) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("wavefunction: grids differ");
  return amplitudes_.dot(other.amplitudes_) * grid_.dx();
}

double Wavefunction::mean_position() const {
  return density().dot(grid_.positions()) * grid_.dx();
}

Wavefunction gaussian_packet(const SpatialGrid& g, double center, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian_packet: sigma must be > 0");
  if (!g.contains(center)) throw std::invalid_argument("gaussian_packet: center outside grid");
  Eigen::VectorXcd amp(static_cast<Eigen::Index>(g.size()));
  const double inv = 1.0 / (4.0 * sigma * sigma);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g.x(i) - center;
    amp[static_cast<Eigen::Index>(i)] = std::exp(-d * d * inv);
  }
  return Wavefunction(g, std::move(amp));
}

SpectralState project(const Wavefunction& psi, std::shared_ptr<const EigenSystem> basis) {
  if (!basis) throw std::invalid_argument("project: null basis");
  if (!(psi.grid() == basis->grid)) throw std::invalid_argument("project: wavefunction and basis grids differ");
  const double dx = psi.grid().dx();
  const Eigen::VectorXd re = basis->states.transpose() * psi.amplitudes().real() * dx;
  const Eigen::VectorXd im = basis->states.transpose() * psi.amplitudes().imag() * dx;
  SpectralState s{std::move(basis), Eigen::VectorXcd(re.size()), 0.0};
  s.coefficients.real() = re;
  s.coefficients.imag() = im;
  s.deficit = 1.0 - s.weight();
  return s;
}

SpectralState to_spectral(const Wavefunction& psi, std::shared_ptr<const EigenSystem> basis, double max_deficit) {
  SpectralState s = project(psi, std::move(basis));
  if (s.deficit > max_deficit) {
    throw TruncationError("truncation deficit " + std::to_string(s.deficit) + " exceeds threshold " +
                              std::to_string(max_deficit),
                          s.deficit);
  }
  return s;
}

SpectralState evolve(const SpectralState& s, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("evolve: dt must be >= 0");
  SpectralState out = s;
  for (Eigen::Index n = 0; n < out.coefficients.size(); ++n) {
    const double phase = -s.basis->energies[n] * dt / kHbar;
    out.coefficients[n] *= std::polar(1.0, phase);
  }
  return out;
}

Reconstruction to_position(const SpectralState& s) {
  const auto& es = *s.basis;
  Eigen::VectorXcd amp(es.states.rows());
  amp.real() = es.states * s.coefficients.real();
  amp.imag() = es.states * s.coefficients.imag();
  const double raw = amp.squaredNorm() * es.grid.dx();
  Wavefunction psi(es.grid, std::move(amp));
  return {std::move(psi), 1.0 / std::sqrt(raw)};
}

StepPropagator::StepPropagator(const EigenSystem& basis, double dt) : dt_(dt), phases_(basis.energies.size()) {
  if (!(dt >= 0.0)) throw std::invalid_argument("StepPropagator: dt must be >= 0");
  for (Eigen::Index n = 0; n < phases_.size(); ++n) phases_[n] = std::polar(1.0, -basis.energies[n] * dt / kHbar);
}

}  // namespace qcollapse
