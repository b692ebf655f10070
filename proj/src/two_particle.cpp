#include "qcollapse/two_particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qcollapse/wall_collapse.hpp"

namespace qcollapse {

std::string to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::None: return "none";
    case ProtocolKind::IndividualConservation: return "individual";
    case ProtocolKind::TotalConservation: return "total";
  }
  return "?";
}

ProtocolKind protocol_from_string(const std::string& s) {
  if (s == "none") return ProtocolKind::None;
  if (s == "individual") return ProtocolKind::IndividualConservation;
  if (s == "total") return ProtocolKind::TotalConservation;
  throw std::invalid_argument("protocol must be none|individual|total");
}

std::string to_string(SigmaChoice s) { return s == SigmaChoice::Smaller ? "smaller" : "larger"; }

SigmaChoice sigma_choice_from_string(const std::string& s) {
  if (s == "smaller") return SigmaChoice::Smaller;
  if (s == "larger") return SigmaChoice::Larger;
  throw std::invalid_argument("sigma_choice must be smaller|larger");
}

std::string to_string(SamplingDensity s) {
  switch (s) {
    case SamplingDensity::Product: return "product";
    case SamplingDensity::Particle1: return "particle1";
    case SamplingDensity::Particle2: return "particle2";
  }
  return "?";
}

SamplingDensity sampling_density_from_string(const std::string& s) {
  if (s == "product") return SamplingDensity::Product;
  if (s == "particle1") return SamplingDensity::Particle1;
  if (s == "particle2") return SamplingDensity::Particle2;
  throw std::invalid_argument("sampling_density must be product|particle1|particle2");
}

void CollapseProtocol::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
  if (!(energy_tolerance > 0.0)) throw std::invalid_argument("energy_tolerance must be > 0");
  if (refractory_steps < 1) throw std::invalid_argument("refractory_steps must be >= 1");
}

double TwoParticleCollapse::energy_miss() const {
  return std::max(std::abs(event.e1_post - event.target1), std::abs(event.e2_post - event.target2));
}

TwoParticleState TwoParticleState::from(SpectralState psi1, SpectralState psi2) {
  TwoParticleState s{std::move(psi1), std::move(psi2), 0.0, 0.0};
  s.e1 = expected_energy(s.psi1);
  s.e2 = expected_energy(s.psi2);
  return s;
}

double density_overlap(const Wavefunction& psi1, const Wavefunction& psi2) {
  if (!(psi1.grid() == psi2.grid())) throw std::invalid_argument("density_overlap: grids differ");
  return psi1.amplitudes().cwiseAbs2().dot(psi2.amplitudes().cwiseAbs2()) * psi1.grid().dx();
}

std::optional<double> collapse_location(const Wavefunction& psi1, const Wavefunction& psi2, const Interval& domain,
                                        Rng& rng, SamplingDensity density) {
  if (!(psi1.grid() == psi2.grid())) throw std::invalid_argument("collapse_location: grids differ");
  const auto& g = psi1.grid();
  Eigen::VectorXd w;
  switch (density) {
    case SamplingDensity::Product: w = psi1.density().cwiseProduct(psi2.density()); break;
    case SamplingDensity::Particle1: w = psi1.density(); break;
    case SamplingDensity::Particle2: w = psi2.density(); break;
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!domain.contains(g.x(i))) w[static_cast<Eigen::Index>(i)] = 0.0;
  if (!(w.sum() > 0.0)) return std::nullopt;
  return g.x(sample_index(w, rng.uniform()));
}

FittedGaussian fit_gaussian(std::shared_ptr<const EigenSystem> basis, const OscillatorSpec& o, double a, double energy,
                            SigmaChoice choice, bool refine) {
  const auto roots = variance_roots(energy, a, o);
  if (roots.empty()) {
    std::ostringstream msg;
    msg << "no Gaussian at a=" << a << " has energy " << energy;
    throw std::domain_error(msg.str());
  }
  const double s0 = std::sqrt(choice == SigmaChoice::Smaller ? roots.front() : roots.back());

  auto eval = [&](double s) {
    FittedGaussian f{collapsed_packet(basis, a, s), s, 0.0};
    f.energy = expected_energy(f.state);
    return f;
  };
  FittedGaussian best = eval(s0);
  if (!refine) return best;

  // The grid energy differs from the closed form by a small, slowly varying
  // offset; shift the target by it and re-solve until they agree.
  const double tol = 1e-11 * std::max(1.0, std::abs(energy));
  FittedGaussian current = best;
  for (int i = 0; i < 12 && std::abs(best.energy - energy) > tol; ++i) {
    const double offset = current.energy - expected_energy_gaussian({a, current.sigma}, o);
    const auto shifted = variance_roots(energy - offset, a, o);
    if (shifted.empty()) break;
    const double s = std::sqrt(choice == SigmaChoice::Smaller ? shifted.front() : shifted.back());
    if (s == current.sigma) break;
    current = eval(s);
    if (std::abs(current.energy - energy) < std::abs(best.energy - energy)) best = current;
  }
  return best;
}

namespace {

TwoParticleCollapse collapse_pair(const TwoParticleState& state, double a, double target1, double target2,
                                  const TwoParticleSystem& sys, const CollapseProtocol& protocol) {
  auto f1 = fit_gaussian(sys.basis1, sys.osc1, a, target1, protocol.sigma_choice, protocol.refine_energy);
  auto f2 = fit_gaussian(sys.basis2, sys.osc2, a, target2, protocol.sigma_choice, protocol.refine_energy);
  TwoParticleCollapse out;
  out.state = TwoParticleState{std::move(f1.state), std::move(f2.state), f1.energy, f2.energy};
  out.event.a = a;
  out.event.e1_pre = state.e1;
  out.event.e2_pre = state.e2;
  out.event.e1_post = f1.energy;
  out.event.e2_post = f2.energy;
  out.event.sigma1 = f1.sigma;
  out.event.sigma2 = f2.sigma;
  out.event.target1 = target1;
  out.event.target2 = target2;
  return out;
}

}  // namespace

TwoParticleCollapse collapse_individual(const TwoParticleState& state, double a, const TwoParticleSystem& sys,
                                        const CollapseProtocol& protocol) {
  const auto d1 = allowed_domain(state.e1, sys.osc1);
  const auto d2 = allowed_domain(state.e2, sys.osc2);
  if (!d1 || !d1->contains(a) || !d2 || !d2->contains(a))
    throw std::domain_error("collapse_individual: collapse point outside the allowed domain");
  auto out = collapse_pair(state, a, state.e1, state.e2, sys, protocol);
  out.event.protocol = ProtocolKind::IndividualConservation;
  return out;
}

std::optional<TwoParticleCollapse> collapse_total(const TwoParticleState& state, double a,
                                                  const TwoParticleSystem& sys, const CollapseProtocol& protocol,
                                                  Rng& rng) {
  const double floor1 = minimum_energy_at(a, sys.osc1);
  const double floor2 = minimum_energy_at(a, sys.osc2);
  const auto split = partition_energy_floored(state.total(), floor1, floor2, rng);
  if (!split) return std::nullopt;
  auto out = collapse_pair(state, a, split->first, split->second, sys, protocol);
  out.event.protocol = ProtocolKind::TotalConservation;
  if (out.energy_miss() > protocol.energy_tolerance) return std::nullopt;
  return out;
}

TwoParticleRunResult run_two_particle(const TwoParticleSettings& settings, Rng& rng) {
  const auto& sys = settings.system;
  if (!sys.basis1 || !sys.basis2) throw std::invalid_argument("run_two_particle: missing basis");
  if (!(sys.basis1->grid == sys.basis2->grid)) throw std::invalid_argument("run_two_particle: bases on different grids");
  if (!(settings.dt > 0.0)) throw std::invalid_argument("run_two_particle: dt must be > 0");
  if (settings.n_steps < 1) throw std::invalid_argument("run_two_particle: n_steps must be >= 1");
  settings.protocol.validate();
  const auto& protocol = settings.protocol;
  const auto& grid = sys.basis1->grid;
  const bool collapses = protocol.kind != ProtocolKind::None;
  const std::size_t decimation = std::max<std::size_t>(settings.decimation, 1);

  auto s1 = to_spectral(gaussian_packet(grid, settings.a0_1, settings.sigma0), sys.basis1, settings.max_deficit);
  auto s2 = to_spectral(gaussian_packet(grid, settings.a0_2, settings.sigma0), sys.basis2, settings.max_deficit);
  TwoParticleRunResult out;
  out.initial_deficit1 = s1.deficit;
  out.initial_deficit2 = s2.deficit;
  TwoParticleState state = TwoParticleState::from(std::move(s1), std::move(s2));

  const StepPropagator step1(*sys.basis1, settings.dt);
  const StepPropagator step2(*sys.basis2, settings.dt);
  DensityAccumulator rho1(static_cast<std::size_t>(sys.basis1->energies.size()));
  DensityAccumulator rho2(static_cast<std::size_t>(sys.basis2->energies.size()));

  std::vector<double> e1, e2;
  e1.reserve(settings.n_steps + 1);
  e2.reserve(settings.n_steps + 1);
  out.overlap.reserve(settings.n_steps + 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto current_overlap = [&]() {
    const auto p1 = to_position(state.psi1).psi;
    const auto p2 = to_position(state.psi2).psi;
    return std::pair{density_overlap(p1, p2), std::pair{p1, p2}};
  };
  std::vector<std::optional<TwoParticleState>> captured(settings.capture_steps.size());
  auto record = [&](std::size_t k, double overlap) {
    for (std::size_t i = 0; i < captured.size(); ++i)
      if (settings.capture_steps[i] == k) captured[i] = state;
    e1.push_back(state.e1);
    e2.push_back(state.e2);
    out.overlap.push_back(overlap);
    if (k % decimation == 0) {
      out.snapshot_steps.push_back(k);
      out.snapshots.push_back(state);
    }
  };
  record(0, collapses ? current_overlap().first : nan);

  std::size_t since_collapse = std::numeric_limits<std::size_t>::max() / 2;
  for (std::size_t k = 1; k <= settings.n_steps; ++k) {
    step1.step(state.psi1.coefficients);
    step2.step(state.psi2.coefficients);
    ++since_collapse;
    double overlap = nan;
    if (collapses && since_collapse >= protocol.refractory_steps) {
      const double t = static_cast<double>(k) * settings.dt;
      const auto [ov, psis] = current_overlap();
      overlap = ov;
      const double p = std::clamp(protocol.lambda * ov, 0.0, 1.0);
      if (rng.uniform() < p) {
        const auto& [psi1, psi2] = psis;
        std::optional<TwoParticleCollapse> hit;
        std::string reason;
        if (protocol.kind == ProtocolKind::IndividualConservation) {
          const auto d1 = allowed_domain(state.e1, sys.osc1);
          const auto d2 = allowed_domain(state.e2, sys.osc2);
          const auto dom = d1 && d2 ? intersect(*d1, *d2) : std::nullopt;
          if (!dom) reason = "empty domain intersection";
          else if (const auto a = collapse_location(psi1, psi2, *dom, rng, protocol.sampling); !a)
            reason = "no density in domain";
          else if (auto c = collapse_individual(state, *a, sys, protocol); c.energy_miss() > protocol.energy_tolerance)
            reason = "energy not representable";
          else
            hit = std::move(c);
        } else {
          const Interval whole{grid.x_min(), grid.x_max()};
          std::size_t attempts = 0;
          while (!hit && attempts <= protocol.max_resample) {
            ++attempts;
            const auto a = collapse_location(psi1, psi2, whole, rng, protocol.sampling);
            if (!a) break;
            hit = collapse_total(state, *a, sys, protocol, rng);
          }
          if (hit) hit->event.attempts = attempts;
          else reason = "no feasible partition";
        }
        if (hit) {
          hit->event.step_index = k;
          hit->event.time = t;
          out.events.push_back(hit->event);
          state = std::move(hit->state);
          since_collapse = 0;
        } else {
          out.skipped.push_back({k, t, reason});
        }
      }
    }
    rho1.add(state.psi1.coefficients);
    rho2.add(state.psi2.coefficients);
    record(k, overlap);
  }

  out.e1 = make_series(std::move(e1), settings.dt);
  out.e2 = make_series(std::move(e2), settings.dt);
  out.position1 = summarize_pdf(grid, rho1.position_pdf(*sys.basis1));
  out.position2 = summarize_pdf(grid, rho2.position_pdf(*sys.basis2));
  for (auto& c : captured) {
    if (!c) throw std::invalid_argument("run_two_particle: capture step beyond n_steps");
    out.captured.push_back(std::move(*c));
  }
  return out;
}

}  // namespace qcollapse
