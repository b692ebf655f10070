#include "qcollapse/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace qcollapse {

using cd = std::complex<double>;

Eigen::VectorXd WignerField::x_marginal() const {
  const double h = dp();
  Eigen::VectorXd m = values.rowwise().sum() * h;
  if (values.cols() > 1) m -= 0.5 * h * (values.col(0) + values.col(values.cols() - 1));
  return m;
}

Eigen::VectorXd WignerField::p_marginal() const {
  return values.colwise().sum().transpose() * x_grid.dx();
}

double WignerField::integral() const { return x_marginal().sum() * x_grid.dx(); }

WignerField wigner(const Wavefunction& psi, std::size_t p_count, double p_max) {
  if (p_count < 2) throw std::invalid_argument("wigner: p_count must be >= 2");
  if (!(p_max > 0.0)) throw std::invalid_argument("wigner: p_max must be > 0");
  const SpatialGrid& g = psi.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto np = static_cast<Eigen::Index>(p_count);
  const double dx = g.dx();
  const auto& a = psi.amplitudes();

  WignerField w{g, Eigen::VectorXd::LinSpaced(np, -p_max, p_max), Eigen::MatrixXd::Zero(n, np), 0.0};
  const double dp = w.p[1] - w.p[0];

  // Products psi*(x+y) psi(x-y) vanish unless both points sit in the support.
  const double cut = 1e-10 * a.cwiseAbs().maxCoeff();
  Eigen::Index lo = 0, hi = n - 1;
  while (lo < n && std::abs(a[lo]) <= cut) ++lo;
  while (hi > lo && std::abs(a[hi]) <= cut) --hi;

  std::vector<cd> acc(p_count);
  const double pref = dx / (std::numbers::pi * kHbar);
  for (Eigen::Index j = lo; j <= hi; ++j) {
    std::fill(acc.begin(), acc.end(), cd{0.0, 0.0});
    const Eigen::Index kmax = std::min(j - lo, hi - j);
    for (Eigen::Index k = -kmax; k <= kmax; ++k) {
      const cd f = std::conj(a[j + k]) * a[j - k];
      if (f == cd{0.0, 0.0}) continue;
      const double y = static_cast<double>(k) * dx;
      // exp(2 i p y / hbar) across the p grid by recurrence.
      cd z = std::polar(1.0, -2.0 * p_max * y / kHbar);
      const cd step = std::polar(1.0, 2.0 * dp * y / kHbar);
      for (std::size_t l = 0; l < p_count; ++l) {
        acc[l] += f * z;
        z *= step;
      }
    }
    for (std::size_t l = 0; l < p_count; ++l) {
      w.values(j, static_cast<Eigen::Index>(l)) = pref * acc[l].real();
      w.max_imaginary = std::max(w.max_imaginary, pref * std::abs(acc[l].imag()));
    }
  }
  if (w.max_imaginary > 1e-10) {
    throw std::logic_error("wigner: imaginary residue " + std::to_string(w.max_imaginary) + " exceeds 1e-10");
  }
  return w;
}

TimeSeries make_series(std::vector<double> values, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time series: dt must be > 0");
  TimeSeries ts;
  ts.t.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) ts.t[k] = static_cast<double>(k) * dt;
  ts.values = std::move(values);
  return ts;
}

TimeSeries overlap_series(std::span<const SpectralState> trajectory, const SpectralState& psi0, double dt) {
  std::vector<double> v;
  v.reserve(trajectory.size());
  for (const auto& s : trajectory) {
    if (s.basis != psi0.basis) throw std::invalid_argument("overlap_series: states use different eigensystems");
    v.push_back(std::abs(psi0.coefficients.dot(s.coefficients)));
  }
  return make_series(std::move(v), dt);
}

SpectrumWindow window_from_string(const std::string& s) {
  if (s == "rectangular" || s == "none") return SpectrumWindow::Rectangular;
  if (s == "hann") return SpectrumWindow::Hann;
  throw std::invalid_argument("unknown spectrum window '" + s + "' (expected rectangular|hann)");
}

std::string to_string(SpectrumWindow w) { return w == SpectrumWindow::Hann ? "hann" : "rectangular"; }

Spectrum spectrum(const TimeSeries& ts, SpectrumWindow window) {
  const std::size_t n = ts.size();
  if (n < 2) throw std::invalid_argument("spectrum: need at least 2 samples");
  const double dt = ts.dt();
  double mean = 0.0;
  for (double v : ts.values) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    double w = 1.0;
    if (window == SpectrumWindow::Hann) {
      w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1)));
    }
    x[k] = (ts.values[k] - mean) * w;
  }
  Eigen::FFT<double> fft;
  std::vector<cd> out;
  fft.fwd(out, x);

  Spectrum s;
  const std::size_t half = n / 2;
  s.frequency.reserve(half + 1);
  s.amplitude.reserve(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    s.frequency.push_back(static_cast<double>(k) / (static_cast<double>(n) * dt));
    s.amplitude.push_back(std::abs(out[k]) / static_cast<double>(n));
  }
  return s;
}

namespace {

double correlation(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ChaosTestResult zero_one_chaos_test(std::span<const double> phi, std::size_t n_c, Rng& rng) {
  const std::size_t n = phi.size();
  if (n < 1000) throw std::invalid_argument("0-1 test: series must have at least 1000 samples");
  if (n_c < 50) throw std::invalid_argument("0-1 test: need at least 50 values of c");
  const std::size_t n_cut = n / 10;
  const std::size_t n_avg = n - n_cut;

  double mean = 0.0;
  for (double v : phi) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> xi(n_cut);
  for (std::size_t k = 0; k < n_cut; ++k) xi[k] = static_cast<double>(k + 1);

  ChaosTestResult out;
  std::vector<double> p(n + 1), q(n + 1), d(n_cut);
  for (std::size_t ic = 0; ic < n_c; ++ic) {
    const double c = rng.uniform(std::numbers::pi / 5.0, 4.0 * std::numbers::pi / 5.0);
    p[0] = q[0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double jc = static_cast<double>(j) * c;
      p[j] = p[j - 1] + phi[j - 1] * std::cos(jc);
      q[j] = q[j - 1] + phi[j - 1] * std::sin(jc);
    }
    for (std::size_t m = 1; m <= n_cut; ++m) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= n_avg; ++j) {
        const double dp = p[j + m] - p[j];
        const double dq = q[j + m] - q[j];
        acc += dp * dp + dq * dq;
      }
      const double msd = acc / static_cast<double>(n_avg);
      const double osc = mean * mean * (1.0 - std::cos(static_cast<double>(m) * c)) / (1.0 - std::cos(c));
      d[m - 1] = msd - osc;
    }
    out.c_values.push_back(c);
    out.k_values.push_back(correlation(xi, d));
  }
  out.k_median = median(out.k_values);
  return out;
}

double expected_energy(const SpectralState& s) {
  const Eigen::VectorXd w = s.coefficients.cwiseAbs2();
  const double total = w.sum();
  if (!(total > 0.0)) throw std::invalid_argument("expected_energy: zero state");
  return w.dot(s.basis->energies) / total;
}

Eigen::VectorXd energy_probabilities(std::span<const SpectralState> samples) {
  if (samples.empty()) throw std::invalid_argument("energy_probabilities: no samples");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(samples.front().coefficients.size());
  for (const auto& s : samples) acc += s.coefficients.cwiseAbs2();
  return acc / static_cast<double>(samples.size());
}

DistributionSummary summarize_pdf(const SpatialGrid& g, Eigen::VectorXd pdf) {
  if (static_cast<std::size_t>(pdf.size()) != g.size()) throw std::invalid_argument("pdf size does not match grid");
  const double dx = g.dx();
  pdf = pdf.cwiseMax(0.0);
  const double total = pdf.sum() * dx;
  if (!(total > 0.0)) throw std::invalid_argument("pdf has zero mass");
  pdf /= total;
  const Eigen::VectorXd x = g.positions();
  DistributionSummary s;
  s.mean = pdf.dot(x) * dx;
  const Eigen::ArrayXd dev = x.array() - s.mean;
  const double m2 = (pdf.array() * dev.square()).sum() * dx;
  const double m3 = (pdf.array() * dev.cube()).sum() * dx;
  const double m4 = (pdf.array() * dev.square().square()).sum() * dx;
  s.sd = std::sqrt(m2);
  s.skewness = m3 / std::pow(m2, 1.5);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  s.pdf = std::move(pdf);
  return s;
}

DistributionSummary position_statistics(std::span<const Wavefunction> trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("position_statistics: empty trajectory");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(trajectory.front().grid().size()));
  for (const auto& psi : trajectory) acc += psi.density();
  return summarize_pdf(trajectory.front().grid(), acc / static_cast<double>(trajectory.size()));
}

std::vector<double> peak_heights(const Eigen::VectorXd& pdf, double rel_prominence) {
  const Eigen::Index n = pdf.size();
  std::vector<double> peaks;
  if (n < 3) return peaks;
  const double threshold = rel_prominence * pdf.maxCoeff();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(pdf[i] > pdf[i - 1] && pdf[i] >= pdf[i + 1])) continue;
    // Prominence: height above the higher of the two bounding minima, where
    // each side's minimum is taken up to the next higher point.
    double left_min = pdf[i];
    Eigen::Index j = i - 1;
    for (; j >= 0 && pdf[j] <= pdf[i]; --j) left_min = std::min(left_min, pdf[j]);
    double right_min = pdf[i];
    Eigen::Index k = i + 1;
    for (; k < n && pdf[k] <= pdf[i]; ++k) right_min = std::min(right_min, pdf[k]);
    if (pdf[i] - std::max(left_min, right_min) >= threshold) peaks.push_back(pdf[i]);
  }
  return peaks;
}

std::size_t count_peaks(const Eigen::VectorXd& pdf, double rel_prominence) {
  return peak_heights(pdf, rel_prominence).size();
}

DensityAccumulator::DensityAccumulator(std::size_t n_modes)
    : rho_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(n_modes))) {}

void DensityAccumulator::add(const Eigen::VectorXcd& c) {
  const double w = c.squaredNorm();
  rho_.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0 / w);
  ++samples_;
}

Eigen::VectorXd DensityAccumulator::mode_populations() const {
  if (samples_ == 0) throw std::logic_error("DensityAccumulator: no samples");
  return rho_.diagonal().real() / static_cast<double>(samples_);
}

Eigen::VectorXd DensityAccumulator::position_pdf(const EigenSystem& basis) const {
  if (samples_ == 0) throw std::logic_error("DensityAccumulator: no samples");
  // Only Re(rho) survives in diag(V rho V^T) for real V.
  const Eigen::MatrixXd lower = rho_.real();
  const Eigen::MatrixXd re = lower.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd vr = basis.states * re;
  return vr.cwiseProduct(basis.states).rowwise().sum() / static_cast<double>(samples_);
}

}  // namespace qcollapse
