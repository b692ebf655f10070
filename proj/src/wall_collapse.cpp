#include "qcollapse/wall_collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcollapse {

void WallPostulate::validate() const {
  if (!random_threshold() && !(r > 0.0 && r < 1.0)) throw std::invalid_argument("r ∈ (0,1)");
  if (!(sigma_post > 0.0)) throw std::invalid_argument("sigma_post must be > 0");
  if (!std::isfinite(wall)) throw std::invalid_argument("wall position must be finite");
  if (refractory_steps < 1) throw std::invalid_argument("refractory_steps must be >= 1");
}

std::string to_string(WallPostulateKind k) {
  switch (k) {
    case WallPostulateKind::P1: return "1";
    case WallPostulateKind::P2: return "2";
    case WallPostulateKind::P3: return "3";
    case WallPostulateKind::P4: return "4";
  }
  return "?";
}

WallPostulateKind postulate_from_string(const std::string& s) {
  if (s == "1" || s == "P1") return WallPostulateKind::P1;
  if (s == "2" || s == "P2") return WallPostulateKind::P2;
  if (s == "3" || s == "P3") return WallPostulateKind::P3;
  if (s == "4" || s == "P4") return WallPostulateKind::P4;
  throw std::invalid_argument("postulate must be one of 1, 2, 3, 4");
}

std::string to_string(ThresholdRedraw r) { return r == ThresholdRedraw::PerCheck ? "check" : "collapse"; }

ThresholdRedraw redraw_from_string(const std::string& s) {
  if (s == "check") return ThresholdRedraw::PerCheck;
  if (s == "collapse") return ThresholdRedraw::PerCollapse;
  throw std::invalid_argument("r_redraw must be check|collapse");
}

std::string to_string(LocationSampling s) { return s == LocationSampling::Full ? "full" : "beyond_wall"; }

LocationSampling sampling_from_string(const std::string& s) {
  if (s == "full") return LocationSampling::Full;
  if (s == "beyond_wall") return LocationSampling::BeyondWall;
  throw std::invalid_argument("location_sampling must be full|beyond_wall");
}

double beyond_wall_probability(const Wavefunction& psi, double x_wall) {
  const auto& g = psi.grid();
  const std::size_t first = g.first_index_at_or_beyond(x_wall);
  if (first >= g.size()) return 0.0;
  const auto n = static_cast<Eigen::Index>(g.size() - first);
  const double q = psi.amplitudes().tail(n).squaredNorm() * g.dx();
  return std::clamp(q, 0.0, 1.0);
}

std::size_t sample_index(const Eigen::VectorXd& weights, double u) {
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("sample_index: weights have zero mass");
  const double target = u * total;
  double acc = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (acc > target) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(last_positive);
}

SpectralState collapsed_packet(std::shared_ptr<const EigenSystem> basis, double center, double sigma) {
  const auto& g = basis->grid;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("collapsed_packet: sigma must be > 0");
  if (!g.contains(center)) throw std::invalid_argument("collapsed_packet: center outside grid");
  // Beyond 12 sigma the amplitude is below e^-36 of its peak, so only that
  // window of rows enters the projection.
  const double reach = 12.0 * sigma;
  const std::size_t lo = center - reach <= g.x_min() ? 0 : g.first_index_at_or_beyond(center - reach);
  const std::size_t hi = std::min(g.size(), g.first_index_at_or_beyond(center + reach) + 1);
  const auto n = static_cast<Eigen::Index>(hi - lo);
  Eigen::VectorXd w(n);
  const double inv = 1.0 / (4.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = g.x(lo + static_cast<std::size_t>(i)) - center;
    w[i] = std::exp(-d * d * inv);
  }
  w /= std::sqrt(w.squaredNorm() * g.dx());
  const Eigen::VectorXd c = basis->states.middleRows(static_cast<Eigen::Index>(lo), n).transpose() * w * g.dx();
  SpectralState s{std::move(basis), c.cast<std::complex<double>>(), 0.0};
  s.deficit = 1.0 - s.weight();
  s.coefficients /= std::sqrt(s.weight());
  return s;
}

WallCollapser::WallCollapser(std::shared_ptr<const EigenSystem> basis, WallPostulate postulate)
    : basis_(std::move(basis)), postulate_(postulate) {
  postulate_.validate();
  const auto& g = basis_->grid;
  first_beyond_ = g.first_index_at_or_beyond(postulate_.wall);
  const auto rows = static_cast<Eigen::Index>(g.size() - std::min(first_beyond_, g.size()));
  const auto tail = basis_->states.bottomRows(rows);
  projector_ = tail.transpose() * tail * g.dx();
}

double WallCollapser::beyond_mass(const Eigen::VectorXcd& c) const {
  // M is real symmetric, so the cross terms between Re c and Im c cancel.
  const Eigen::VectorXd re = c.real();
  const Eigen::VectorXd im = c.imag();
  const double num = re.dot(projector_ * re) + im.dot(projector_ * im);
  return num / c.squaredNorm();
}

double WallCollapser::threshold(Rng& rng) {
  if (!postulate_.random_threshold()) return postulate_.r;
  if (postulate_.redraw == ThresholdRedraw::PerCheck) return rng.uniform();
  if (!pending_threshold_) pending_threshold_ = rng.uniform();
  return *pending_threshold_;
}

std::optional<WallCollapse> WallCollapser::check_and_collapse(const SpectralState& s, std::size_t step, double time,
                                                              Rng& rng) {
  const double q = beyond_mass(s.coefficients);
  const double thr = threshold(rng);
  if (q < thr) return std::nullopt;

  double location = postulate_.wall;
  if (postulate_.samples_location()) {
    const auto psi = to_position(s).psi;
    Eigen::VectorXd w = psi.density();
    if (postulate_.sampling == LocationSampling::BeyondWall) w.head(static_cast<Eigen::Index>(first_beyond_)).setZero();
    location = basis_->grid.x(sample_index(w, rng.uniform()));
  }
  pending_threshold_.reset();

  WallCollapse out{collapsed_packet(basis_, location, postulate_.sigma_post), {}};
  out.event.step_index = step;
  out.event.time = time;
  out.event.location = location;
  out.event.pre_energy = expected_energy(s);
  out.event.post_energy = expected_energy(out.state);
  out.event.threshold_used = thr;
  out.event.beyond_mass = q;
  out.event.post_deficit = out.state.deficit;
  return out;
}

WallRunResult run_wall_simulation(const WallRunSettings& settings, Rng& rng) {
  if (!settings.basis) throw std::invalid_argument("run_wall_simulation: no basis");
  if (!(settings.dt > 0.0)) throw std::invalid_argument("run_wall_simulation: dt must be > 0");
  if (settings.n_steps < 1) throw std::invalid_argument("run_wall_simulation: n_steps must be >= 1");
  const auto& basis = settings.basis;
  const auto n_modes = static_cast<std::size_t>(basis->energies.size());
  const std::size_t decimation = std::max<std::size_t>(settings.decimation, 1);

  const SpectralState initial = to_spectral(gaussian_packet(basis->grid, settings.initial_center, settings.initial_sigma),
                                            basis, settings.max_deficit);
  const StepPropagator stepper(*basis, settings.dt);
  std::optional<WallCollapser> collapser;
  if (settings.postulate) collapser.emplace(basis, *settings.postulate);

  WallRunResult out;
  out.initial_deficit = initial.deficit;
  out.initial_energy = expected_energy(initial);
  const std::size_t n_samples = settings.n_steps + 1;
  std::vector<double> overlap;
  overlap.reserve(n_samples);
  out.energy_trace.reserve(n_samples);
  out.beyond_trace.reserve(n_samples);

  DensityAccumulator density(n_modes);
  Eigen::VectorXd populations = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_modes));
  double energy_sum = 0.0;

  SpectralState state = initial;
  double energy = out.initial_energy;
  std::size_t since_collapse = std::numeric_limits<std::size_t>::max() / 2;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::optional<SpectralState>> captured(settings.capture_steps.size());
  auto record = [&](std::size_t k, double q) {
    for (std::size_t i = 0; i < captured.size(); ++i)
      if (settings.capture_steps[i] == k) captured[i] = state;
    overlap.push_back(std::abs(initial.coefficients.dot(state.coefficients)));
    out.energy_trace.push_back(energy);
    out.beyond_trace.push_back(q);
    if (k % decimation == 0) {
      out.snapshot_steps.push_back(k);
      out.snapshots.push_back(state);
    }
  };
  record(0, collapser ? collapser->beyond_mass(state.coefficients) : nan);

  for (std::size_t k = 1; k <= settings.n_steps; ++k) {
    stepper.step(state.coefficients);
    ++since_collapse;
    double q = nan;
    if (collapser && since_collapse >= settings.postulate->refractory_steps) {
      const double t = static_cast<double>(k) * settings.dt;
      auto hit = collapser->check_and_collapse(state, k, t, rng);
      q = hit ? hit->event.beyond_mass : collapser->beyond_mass(state.coefficients);
      if (hit) {
        state = std::move(hit->state);
        energy = hit->event.post_energy;
        out.events.push_back(hit->event);
        since_collapse = 0;
      }
    }
    density.add(state.coefficients);
    populations += state.coefficients.cwiseAbs2();
    energy_sum += energy;
    record(k, q);
  }

  const auto steps = static_cast<double>(settings.n_steps);
  out.overlap = make_series(std::move(overlap), settings.dt);
  out.energy_probabilities = populations / steps;
  out.position = summarize_pdf(basis->grid, density.position_pdf(*basis));
  out.mean_energy = energy_sum / steps;
  for (auto& c : captured) {
    if (!c) throw std::invalid_argument("run_wall_simulation: capture step beyond n_steps");
    out.captured.push_back(std::move(*c));
  }
  return out;
}

}  // namespace qcollapse
