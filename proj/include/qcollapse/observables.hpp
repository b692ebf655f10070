#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qcollapse/propagator.hpp"
#include "qcollapse/rng.hpp"

namespace qcollapse {

// ---------------------------------------------------------------------------
// Wigner quasiprobability
// ---------------------------------------------------------------------------

struct WignerField {
  SpatialGrid x_grid;
  Eigen::VectorXd p;        // uniform momentum grid
  Eigen::MatrixXd values;   // rows: x, cols: p
  double max_imaginary = 0.0;

  double dp() const { return p.size() > 1 ? p[1] - p[0] : 0.0; }
  /// Trapezoid integral over p at each x.
  Eigen::VectorXd x_marginal() const;
  /// Rectangle rule in x of the trapezoid p-integral.
  Eigen::VectorXd p_marginal() const;
  double integral() const;
};

/// W(x,p) = 1/(pi hbar) sum_y psi*(x+y) psi(x-y) exp(2ipy/hbar) dy over the
/// symmetric on-grid y range at each x. p runs over [-p_max, p_max].
/// Throws std::logic_error if the imaginary residue exceeds 1e-10.
WignerField wigner(const Wavefunction& psi, std::size_t p_count = 400, double p_max = 10.0);

// ---------------------------------------------------------------------------
// Time series and spectra
// ---------------------------------------------------------------------------

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> values;

  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  std::size_t size() const { return values.size(); }
};

TimeSeries make_series(std::vector<double> values, double dt);

/// |<psi0|psi(t_k)>| from spectral coefficients; trajectory[k] is the state
/// at t = k dt.
TimeSeries overlap_series(std::span<const SpectralState> trajectory, const SpectralState& psi0, double dt);

enum class SpectrumWindow { Rectangular, Hann };
SpectrumWindow window_from_string(const std::string& s);
std::string to_string(SpectrumWindow w);

struct Spectrum {
  std::vector<double> frequency;  // cycles per unit time
  std::vector<double> amplitude;  // |X_k| / N
};

/// One-sided DFT magnitude of the mean-removed series.
Spectrum spectrum(const TimeSeries& ts, SpectrumWindow window = SpectrumWindow::Rectangular);

struct ChaosTestResult {
  double k_median = 0.0;
  std::vector<double> c_values;
  std::vector<double> k_values;
};

/// 0-1 test for chaos, correlation variant: median over `n_c` frequencies
/// c ~ U(pi/5, 4pi/5) of corr(n, D_c(n)) for n up to N/10.
/// Throws std::invalid_argument if the series is shorter than 1000 or n_c < 50.
ChaosTestResult zero_one_chaos_test(std::span<const double> series, std::size_t n_c, Rng& rng);

// ---------------------------------------------------------------------------
// Energy and position statistics
// ---------------------------------------------------------------------------

/// sum |c_n|^2 E_n / sum |c_n|^2
double expected_energy(const SpectralState& s);

/// Average of |c_n|^2 over the samples (unnormalized, so the sum is
/// 1 - deficit for projected states).
Eigen::VectorXd energy_probabilities(std::span<const SpectralState> samples);

struct DistributionSummary {
  Eigen::VectorXd pdf;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Normalizes `pdf` on the grid and computes its moments.
DistributionSummary summarize_pdf(const SpatialGrid& g, Eigen::VectorXd pdf);

/// Time-averaged |psi|^2 and its moments.
DistributionSummary position_statistics(std::span<const Wavefunction> trajectory);

/// Heights of the local maxima whose prominence exceeds
/// `rel_prominence` * max(pdf), left to right.
std::vector<double> peak_heights(const Eigen::VectorXd& pdf, double rel_prominence = 0.05);
std::size_t count_peaks(const Eigen::VectorXd& pdf, double rel_prominence = 0.05);

/// Running average of the normalized density matrix c c^dagger / |c|^2.
/// Its grid diagonal equals the time-averaged |to_position(c)|^2.
class DensityAccumulator {
 public:
  explicit DensityAccumulator(std::size_t n_modes);
  void add(const Eigen::VectorXcd& c);
  std::size_t samples() const { return samples_; }
  /// Mean over samples of |c_n|^2 / |c|^2.
  Eigen::VectorXd mode_populations() const;
  Eigen::VectorXd position_pdf(const EigenSystem& basis) const;

 private:
  Eigen::MatrixXcd rho_;
  std::size_t samples_ = 0;
};

}  // namespace qcollapse
