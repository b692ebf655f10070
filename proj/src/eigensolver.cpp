#include "qcollapse/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qcollapse {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Lower band storage with room for one bulge diagonal beyond `width`.
class WorkBand {
 public:
  WorkBand(const SymmetricBandMatrix& h, std::size_t width)
      : n_(h.size()), width_(width), bands_(width + 1, std::vector<double>(h.size(), 0.0)) {
    for (std::size_t j = 0; j < n_; ++j) bands_[0][j] = h.diag[static_cast<Eigen::Index>(j)];
    for (std::size_t d = 1; d <= h.bandwidth(); ++d) {
      for (std::size_t j = 0; j + d < n_; ++j) bands_[d][j] = h.off[d - 1][static_cast<Eigen::Index>(j)];
    }
  }

  std::size_t size() const { return n_; }

  double get(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    const std::size_t d = i - j;
    return d > width_ ? 0.0 : bands_[d][j];
  }
  void set(std::size_t i, std::size_t j, double v) {
    if (i < j) std::swap(i, j);
    bands_[i - j][j] = v;
  }

  /// A <- G A G^T for the rotation acting on rows/cols (p, p+1) with
  /// p' = c p + s q, q' = -s p + c q.
  void rotate(std::size_t p, double c, double s) {
    const std::size_t q = p + 1;
    const std::size_t lo = p >= width_ ? p - width_ : 0;
    const std::size_t hi = std::min(n_ - 1, q + width_);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == p || j == q) continue;
      const double apj = get(p, j);
      const double aqj = get(q, j);
      if (apj == 0.0 && aqj == 0.0) continue;
      set(p, j, c * apj + s * aqj);
      set(q, j, -s * apj + c * aqj);
    }
    const double app = get(p, p);
    const double aqq = get(q, q);
    const double apq = get(p, q);
    set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
    set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
    set(p, q, c * s * (aqq - app) + (c * c - s * s) * apq);
  }

 private:
  std::size_t n_;
  std::size_t width_;
  std::vector<std::vector<double>> bands_;
};

/// LU factorization with partial pivoting of (H - shift I), banded.
class ShiftedBandLU {
 public:
  ShiftedBandLU(const SymmetricBandMatrix& h, double shift, double pivot_floor)
      : n_(h.size()), b_(h.bandwidth()), cols_(3 * b_ + 1), u_(n_ * cols_, 0.0), l_(n_ * (b_ + 1), 0.0),
        piv_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i >= b_ ? i - b_ : 0;
      const std::size_t jhi = std::min(n_ - 1, i + b_);
      for (std::size_t j = jlo; j <= jhi; ++j) at(i, j) = h.at(i, j) - (i == j ? shift : 0.0);
    }
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last = std::min(n_ - 1, k + b_);
      std::size_t p = k;
      for (std::size_t i = k + 1; i <= last; ++i) {
        if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
      }
      piv_[k] = p;
      const std::size_t jend = std::min(n_ - 1, k + 2 * b_);
      if (p != k) {
        for (std::size_t j = k; j <= jend; ++j) std::swap(at(k, j), at(p, j));
      }
      if (std::abs(at(k, k)) < pivot_floor) at(k, k) = at(k, k) < 0.0 ? -pivot_floor : pivot_floor;
      const double pivot = at(k, k);
      for (std::size_t i = k + 1; i <= last; ++i) {
        const double m = at(i, k) / pivot;
        lmult(k, i - k) = m;
        at(i, k) = 0.0;
        if (m == 0.0) continue;
        for (std::size_t j = k + 1; j <= jend; ++j) at(i, j) -= m * at(k, j);
      }
    }
  }

  void solve_in_place(Eigen::VectorXd& y) const {
    for (std::size_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(y[idx(k)], y[idx(piv_[k])]);
      const std::size_t last = std::min(n_ - 1, k + b_);
      for (std::size_t i = k + 1; i <= last; ++i) y[idx(i)] -= lmult(k, i - k) * y[idx(k)];
    }
    for (std::size_t kk = n_; kk-- > 0;) {
      double acc = y[idx(kk)];
      const std::size_t jend = std::min(n_ - 1, kk + 2 * b_);
      for (std::size_t j = kk + 1; j <= jend; ++j) acc -= at(kk, j) * y[idx(j)];
      y[idx(kk)] = acc / at(kk, kk);
    }
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
  // Row i stores columns i-b .. i+2b.
  double& at(std::size_t i, std::size_t j) { return u_[i * cols_ + (j + b_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return u_[i * cols_ + (j + b_ - i)]; }
  double& lmult(std::size_t k, std::size_t r) { return l_[k * (b_ + 1) + r]; }
  double lmult(std::size_t k, std::size_t r) const { return l_[k * (b_ + 1) + r]; }

  std::size_t n_;
  std::size_t b_;
  std::size_t cols_;
  std::vector<double> u_;
  std::vector<double> l_;
  std::vector<std::size_t> piv_;
};

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double cut = 1e-3 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cut) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

Eigen::VectorXd tridiagonal_eigenvalues(Eigen::VectorXd d, Eigen::VectorXd sub, int max_iterations) {
  const Eigen::Index n = d.size();
  if (n == 0) return d;
  if (sub.size() != n - 1) throw std::invalid_argument("tridiagonal: sub-diagonal length must be n-1");
  // e[i] couples d[i] and d[i+1]; e[n-1] is a zero sentinel.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e.head(n - 1) = sub;

  for (Eigen::Index l = 0; l < n; ++l) {
    int iter = 0;
    Eigen::Index m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (iter++ == max_iterations) {
        throw EigensolverError("implicit QL did not converge for eigenvalue " + std::to_string(l) + " within " +
                               std::to_string(max_iterations) + " iterations");
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      for (Eigen::Index i = m - 1; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> reduce_to_tridiagonal(const SymmetricBandMatrix& h) {
  const std::size_t n = h.size();
  std::size_t b = h.bandwidth();
  WorkBand a(h, std::max<std::size_t>(b, 1) + 1);

  for (; b > 1; --b) {
    for (std::size_t j = 0; j + b < n; ++j) {
      std::size_t col = j;
      std::size_t row = j + b;
      while (row < n) {
        const double x = a.get(row - 1, col);
        const double y = a.get(row, col);
        if (y == 0.0) break;
        const double r = std::hypot(x, y);
        a.rotate(row - 1, x / r, y / r);
        a.set(row, col, 0.0);
        col = row - 1;
        row += b;
      }
    }
  }

  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
  for (std::size_t i = 0; i < n; ++i) diag[static_cast<Eigen::Index>(i)] = a.get(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) sub[static_cast<Eigen::Index>(i)] = a.get(i + 1, i);
  return {diag, sub};
}

Eigen::VectorXd band_eigenvalues(const SymmetricBandMatrix& h) {
  if (h.bandwidth() == 0) {
    Eigen::VectorXd d = h.diag;
    std::sort(d.begin(), d.end());
    return d;
  }
  auto [diag, sub] = reduce_to_tridiagonal(h);
  return tridiagonal_eigenvalues(std::move(diag), std::move(sub));
}

EigenSystem eigensolve(const SymmetricBandMatrix& h, const SpatialGrid& g, std::size_t n_kept) {
  const std::size_t n = h.size();
  if (n != g.size()) throw std::invalid_argument("eigensolve: matrix and grid sizes differ");
  if (n_kept == 0 || n_kept > n) throw std::invalid_argument("eigensolve: n_kept must be in [1, n]");

  const Eigen::VectorXd all = band_eigenvalues(h);
  const double hnorm = h.inf_norm();
  const double pivot_floor = kEps * hnorm;
  const double sqrt_dx = std::sqrt(g.dx());
  const auto nn = static_cast<Eigen::Index>(n);
  const auto nk = static_cast<Eigen::Index>(n_kept);

  EigenSystem es{g, all.head(nk), Eigen::MatrixXd::Zero(nn, nk)};

  // Unit Euclidean-norm vectors during the solve; rescaled by 1/sqrt(dx) at the end.
  Eigen::VectorXd start(nn);
  for (Eigen::Index i = 0; i < nn; ++i) start[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  start.normalize();

  for (Eigen::Index k = 0; k < nk; ++k) {
    const double lambda = es.energies[k];
    const ShiftedBandLU lu(h, lambda, pivot_floor);
    Eigen::VectorXd v = start;
    for (int it = 0; it < 4; ++it) {
      lu.solve_in_place(v);
      for (Eigen::Index j = 0; j < k; ++j) v -= es.states.col(j).dot(v) * es.states.col(j);
      const double norm = v.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw EigensolverError("inverse iteration broke down at mode " + std::to_string(k));
      }
      v /= norm;
    }
    // Rayleigh quotient refines the eigenvalue to working precision.
    const Eigen::VectorXd hv = h.apply(v);
    const double rq = v.dot(hv);
    const double residual = (hv - rq * v).norm();
    if (residual > 1e-8) {
      throw EigensolverError("mode " + std::to_string(k) + " residual " + std::to_string(residual) +
                             " exceeds 1e-8");
    }
    fix_sign(v);
    es.energies[k] = rq;
    es.states.col(k) = v;
  }
  for (Eigen::Index k = 1; k < nk; ++k) {
    if (!(es.energies[k] > es.energies[k - 1])) {
      throw EigensolverError("eigenvalues not strictly ascending at mode " + std::to_string(k));
    }
  }
  es.states /= sqrt_dx;
  return es;
}

EigenDiagnostics diagnose(const SymmetricBandMatrix& h, const EigenSystem& es) {
  EigenDiagnostics out;
  const double dx = es.grid.dx();
  for (Eigen::Index k = 0; k < es.energies.size(); ++k) {
    const Eigen::VectorXd v = es.states.col(k);
    const double r = (h.apply(v) - es.energies[k] * v).norm() / v.norm();
    out.max_residual = std::max(out.max_residual, r);
  }
  const Eigen::MatrixXd gram = es.states.transpose() * es.states * dx;
  out.max_orthonormality =
      (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  out.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k < es.energies.size(); ++k) {
    out.min_gap = std::min(out.min_gap, es.energies[k] - es.energies[k - 1]);
  }
  return out;
}

}  // namespace qcollapse
