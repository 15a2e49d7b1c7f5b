#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace chaos_anneal::analysis {

/// Half-open time window [t_start, t_end).
struct Window {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct Spectrum {
  std::vector<double> frequencies;  // angular, units of omega_m, ascending from negative
  std::vector<double> magnitude;    // S = |dt / sqrt2 * DFT|
  std::vector<double> normalized;   // S / max S
  Window window;
  double dt = 0.0;
  std::size_t n_samples = 0;

  double resolution() const;  // spacing of the frequency grid
};

struct SpectrumOptions {
  bool hann = false;  // taper; off keeps the bare rectangular window
};

/// Magnitude spectrum of a uniformly sampled series restricted to `window`.
Spectrum intensity_spectrum(std::span<const double> times, std::span<const double> series,
                            const Window& window, const SpectrumOptions& opts = {});

/// Spectra of [t_start, t_mid) and [t_mid, end of series].
std::pair<Spectrum, Spectrum> split_window_spectra(std::span<const double> times, std::span<const double> series,
                                                   double t_mid, const SpectrumOptions& opts = {});

struct BandSpec {
  double half_width = 0.1;        // fraction of the fundamental
  double min_fundamental = 0.0;   // ignore peaks at or below this frequency
  double fundamental = 0.0;       // > 0 overrides the automatic pick
};

/// Largest positive-frequency peak of `spec` above band.min_fundamental, DC excluded.
double find_fundamental(const Spectrum& spec, const BandSpec& band = {});

/// Sum of test S' over bands around k w0 (k >= 2) divided by the same sum for ref.
double sideband_suppression_ratio(const Spectrum& ref, const Spectrum& test, const BandSpec& band = {});

/// Angular frequency in units of omega_m to Hz.
double frequency_to_hz(double omega, double omega_m_hz);

}  // namespace chaos_anneal::analysis
