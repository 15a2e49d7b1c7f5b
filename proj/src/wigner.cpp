#include "chaos_anneal/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chaos_anneal/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chaos_anneal::wigner {

double hermite_polynomial(int n, double x) {
  if (n < 0) throw InvalidParameter("Hermite degree must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double fock_wavefunction(int n, double x) {
  if (n < 0) throw InvalidParameter("Fock index must be non-negative");
  // log of (pi 4^n (n!)^2)^(-1/4)
  const double log_norm = -0.25 * (std::log(std::numbers::pi) + n * std::log(4.0) + 2.0 * std::lgamma(n + 1.0));
  return std::exp(log_norm - 0.5 * x * x) * hermite_polynomial(n, x);
}

namespace {

// Fills out[m] = W_{m, m+k}(x, p) for m = 0 .. count-1 with a single Laguerre recurrence in m.
void offset_diagonal(int k, int count, double r2, double theta, std::vector<complex>& out) {
  const double z = 2.0 * r2;
  const complex phase = std::polar(1.0, k * theta);
  // (sqrt 2 r)^k e^{-r^2} / pi, kept in logs so high orders do not overflow.
  const double log_radial = (k > 0 ? (r2 > 0.0 ? 0.5 * k * std::log(z) : -INFINITY) : 0.0) - r2 -
                            std::log(std::numbers::pi);
  double l_prev = 0.0;
  double l_cur = 1.0;  // L_0^k
  for (int m = 0; m < count; ++m) {
    if (m == 1) {
      l_prev = l_cur;
      l_cur = 1.0 + k - z;
    } else if (m > 1) {
      const double next = ((2.0 * (m - 1) + 1.0 + k - z) * l_cur - (m - 1.0 + k) * l_prev) / m;
      l_prev = l_cur;
      l_cur = next;
    }
    // sqrt(m! / (m+k)!)
    const double log_ratio = 0.5 * (std::lgamma(m + 1.0) - std::lgamma(m + k + 1.0));
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(m)] = sign * std::exp(log_radial + log_ratio) * l_cur * phase;
  }
}

}  // namespace

complex wigner_basis_element(int m, int n, double x, double p) {
  if (m < 0 || n < 0) throw InvalidParameter("Fock indices must be non-negative");
  if (m > n) return std::conj(wigner_basis_element(n, m, x, p));
  std::vector<complex> row(static_cast<std::size_t>(m + 1));
  offset_diagonal(n - m, m + 1, x * x + p * p, std::atan2(p, x), row);
  return row[static_cast<std::size_t>(m)];
}

void GridSpec::validate() const {
  if (nx < 2 || np < 2) throw InvalidParameter("Wigner grid needs at least two points per axis");
  if (!(x_max > x_min) || !(p_max > p_min) || !std::isfinite(x_max - x_min) || !std::isfinite(p_max - p_min)) {
    throw InvalidParameter("Wigner grid ranges must be finite and increasing");
  }
}

GridSpec default_grid(std::size_t dim_a, std::size_t points) {
  // Fock level n reaches out to about sqrt(2n + 1); leave a few vacuum widths beyond.
  const double extent = std::sqrt(2.0 * static_cast<double>(dim_a) + 1.0) + 4.0;
  return {-extent, extent, points, -extent, extent, points};
}

namespace {

class Evaluator {
 public:
  Evaluator(const hilbert::DensityMatrix& rho, const GridSpec& grid) : rho_(rho), grid_(grid) {
    grid.validate();
    if (rho.entries.rows() != rho.entries.cols() || rho.entries.rows() < 1) {
      throw InvalidParameter("cavity density matrix must be square and non-empty");
    }
    dim_ = static_cast<int>(rho.entries.rows());
  }

  WignerGrid make_empty() const {
    WignerGrid w;
    w.x_values.resize(grid_.nx);
    w.p_values.resize(grid_.np);
    for (std::size_t i = 0; i < grid_.nx; ++i) w.x_values[i] = grid_.x_min + static_cast<double>(i) * grid_.dx();
    for (std::size_t j = 0; j < grid_.np; ++j) w.p_values[j] = grid_.p_min + static_cast<double>(j) * grid_.dp();
    w.x_values.back() = grid_.x_max;
    w.p_values.back() = grid_.p_max;
    w.values.assign(grid_.nx * grid_.np, 0.0);
    return w;
  }

  // Row i of the grid; returns the largest imaginary residue in the row.
  double row(WignerGrid& w, std::size_t i) const {
    std::vector<complex> diag(static_cast<std::size_t>(dim_));
    double residue = 0.0;
    const double x = w.x_values[i];
    for (std::size_t j = 0; j < w.p_values.size(); ++j) {
      const double p = w.p_values[j];
      const double r2 = x * x + p * p;
      const double theta = std::atan2(p, x);
      complex total = 0.0;
      for (int k = 0; k < dim_; ++k) {
        offset_diagonal(k, dim_ - k, r2, theta, diag);
        for (int m = 0; m + k < dim_; ++m) {
          const complex wmn = diag[static_cast<std::size_t>(m)];
          total += rho_.entries(m, m + k) * wmn;
          if (k > 0) total += rho_.entries(m + k, m) * std::conj(wmn);
        }
      }
      w.values[i * w.p_values.size() + j] = total.real();
      residue = std::max(residue, std::abs(total.imag()));
    }
    return residue;
  }

  void finish(WignerGrid& w, double residue) const {
    if (residue > kImagResidueTolerance) {
      throw InvalidParameter("Wigner function has imaginary residue " + std::to_string(residue) +
                             "; density matrix is not Hermitian");
    }
    w.max_imag_residue = residue;
    const double cell = grid_.dx() * grid_.dp();
    w.min_value = *std::min_element(w.values.begin(), w.values.end());
    w.max_value = *std::max_element(w.values.begin(), w.values.end());
    double sum = 0.0;
    double neg = 0.0;
    for (double v : w.values) {
      sum += v;
      if (v < 0.0) neg -= v;
    }
    w.normalization = sum * cell;
    w.negative_volume = neg * cell;
    double edge = 0.0;
    const std::size_t nx = w.x_values.size();
    const std::size_t np = w.p_values.size();
    for (std::size_t i = 0; i < nx; ++i) {
      edge = std::max({edge, std::abs(w.at(i, 0)), std::abs(w.at(i, np - 1))});
    }
    for (std::size_t j = 0; j < np; ++j) {
      edge = std::max({edge, std::abs(w.at(0, j)), std::abs(w.at(nx - 1, j))});
    }
    const double peak = std::max(std::abs(w.min_value), std::abs(w.max_value));
    w.support_warning = std::abs(w.normalization - rho_.trace()) > kNormalizationTolerance || edge > 1e-6 * peak;
  }

 private:
  const hilbert::DensityMatrix& rho_;
  const GridSpec& grid_;
  int dim_ = 0;
};

}  // namespace

WignerGrid wigner_from_density(const hilbert::DensityMatrix& rho_a, const GridSpec& grid, int workers) {
  const Evaluator ev(rho_a, grid);
  WignerGrid w = ev.make_empty();
  const auto nx = static_cast<long>(grid.nx);
  std::vector<double> residue(grid.nx, 0.0);
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
#endif
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long i = 0; i < nx; ++i) residue[static_cast<std::size_t>(i)] = ev.row(w, static_cast<std::size_t>(i));
  ev.finish(w, *std::max_element(residue.begin(), residue.end()));
  return w;
}

namespace reference {

WignerGrid wigner_from_density(const hilbert::DensityMatrix& rho_a, const GridSpec& grid) {
  const Evaluator ev(rho_a, grid);
  WignerGrid w = ev.make_empty();
  double residue = 0.0;
  for (std::size_t i = 0; i < grid.nx; ++i) residue = std::max(residue, ev.row(w, i));
  ev.finish(w, residue);
  return w;
}

}  // namespace reference
}  // namespace chaos_anneal::wigner
