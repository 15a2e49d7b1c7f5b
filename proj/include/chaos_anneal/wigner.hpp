#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "chaos_anneal/hilbert.hpp"

namespace chaos_anneal::wigner {

using complex = std::complex<double>;

/// Physicists' Hermite polynomial by the three-term recurrence.
double hermite_polynomial(int n, double x);

/// Position-space Fock wavefunction with unit-variance vacuum, exp(-x^2/2) pi^-1/4 for n = 0.
double fock_wavefunction(int n, double x);

/// W_mn(x, p) in closed Laguerre form; W_nm = conj(W_mn).
complex wigner_basis_element(int m, int n, double x, double p);

/// Rectangular grid; both axes include their end points.
struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t nx = 201;
  double p_min = -5.0;
  double p_max = 5.0;
  std::size_t np = 201;

  void validate() const;
  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }
};

/// Square grid wide enough for a state confined to `dim_a` Fock levels.
GridSpec default_grid(std::size_t dim_a, std::size_t points = 201);

struct WignerGrid {
  std::vector<double> x_values;
  std::vector<double> p_values;
  std::vector<double> values;  // x-major: values[i * p_values.size() + j] = W(x_i, p_j)
  double min_value = 0.0;
  double max_value = 0.0;
  double negative_volume = 0.0;  // integral of |min(W, 0)|
  double normalization = 0.0;    // Riemann sum of W dx dp
  double max_imag_residue = 0.0;
  bool support_warning = false;  // grid edge carries weight or normalization is off by > 1e-3

  double at(std::size_t i, std::size_t j) const { return values[i * p_values.size() + j]; }
};

inline constexpr double kImagResidueTolerance = 1e-10;
inline constexpr double kNormalizationTolerance = 1e-3;

/// W(x, p) = sum_mn rho_mn W_mn(x, p) on a cavity density matrix; rows run in parallel.
WignerGrid wigner_from_density(const hilbert::DensityMatrix& rho_a, const GridSpec& grid, int workers = 0);

namespace reference {
WignerGrid wigner_from_density(const hilbert::DensityMatrix& rho_a, const GridSpec& grid);
}  // namespace reference

}  // namespace chaos_anneal::wigner
