#include "chaos_anneal/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "chaos_anneal/errors.hpp"

namespace chaos_anneal::analysis {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;  // FFTW planning is not thread safe
  return m;
}

std::vector<std::complex<double>> real_dft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

double Spectrum::resolution() const {
  return 2.0 * std::numbers::pi / (static_cast<double>(n_samples) * dt);
}

Spectrum intensity_spectrum(std::span<const double> times, std::span<const double> series,
                            const Window& window, const SpectrumOptions& opts) {
  if (times.size() != series.size()) throw InvalidParameter("times and series differ in length");
  if (!(window.t_end > window.t_start)) throw InvalidParameter("spectrum window is empty");
  std::vector<double> x;
  std::size_t first = times.size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= window.t_start && times[k] < window.t_end) {
      if (first == times.size()) first = k;
      x.push_back(series[k]);
    }
  }
  if (x.size() < 2) throw InvalidParameter("spectrum window holds fewer than two samples");
  const double dt = times[first + 1] - times[first];
  if (!(dt > 0.0)) throw InvalidParameter("sample times must increase");
  for (std::size_t k = first + 1; k < first + x.size(); ++k) {
    if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(times[k]))) {
      throw InvalidParameter("non-uniform sampling at t = " + std::to_string(times[k]));
    }
  }
  const std::size_t n = x.size();
  if (opts.hann) {
    for (std::size_t k = 0; k < n; ++k) {
      x[k] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
    }
  }
  const auto half = real_dft(x);

  Spectrum s;
  s.window = window;
  s.dt = dt;
  s.n_samples = n;
  s.frequencies.resize(n);
  s.magnitude.resize(n);
  const double scale = dt / std::numbers::sqrt2;
  const double dw = s.resolution();
  // Bin k -> signed index k - n/2 after the shift; negative bins mirror the positive ones.
  const auto offset = static_cast<long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i) - offset;
    const auto kk = static_cast<std::size_t>(std::labs(k));
    s.frequencies[i] = static_cast<double>(k) * dw;
    s.magnitude[i] = scale * std::abs(half[kk]);
  }
  const double peak = *std::max_element(s.magnitude.begin(), s.magnitude.end());
  s.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.normalized[i] = peak > 0.0 ? s.magnitude[i] / peak : 0.0;
  return s;
}

std::pair<Spectrum, Spectrum> split_window_spectra(std::span<const double> times, std::span<const double> series,
                                                   double t_mid, const SpectrumOptions& opts) {
  if (times.empty()) throw InvalidParameter("empty series");
  if (!(t_mid > times.front() && t_mid <= times.back())) throw InvalidParameter("t_mid lies outside the series");
  const double end = std::nextafter(times.back(), INFINITY);
  return {intensity_spectrum(times, series, {times.front(), t_mid}, opts),
          intensity_spectrum(times, series, {t_mid, end}, opts)};
}

double find_fundamental(const Spectrum& spec, const BandSpec& band) {
  if (band.fundamental > 0.0) return band.fundamental;
  double best = 0.0;
  double where = 0.0;
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i) {
    const double w = spec.frequencies[i];
    if (w > 0.0 && w > band.min_fundamental && spec.magnitude[i] > best) {
      best = spec.magnitude[i];
      where = w;
    }
  }
  if (!(best > 0.0)) throw InvalidParameter("no identifiable fundamental peak");
  return where;
}

namespace {

double band_sum(const Spectrum& s, double w0, double half_width) {
  double total = 0.0;
  const double w_max = s.frequencies.back();
  for (int k = 2; k * w0 - half_width <= w_max; ++k) {
    const double centre = k * w0;
    for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
      const double w = s.frequencies[i];
      if (w > 0.0 && std::abs(w - centre) <= half_width) total += s.normalized[i];
    }
  }
  return total;
}

}  // namespace

double sideband_suppression_ratio(const Spectrum& ref, const Spectrum& test, const BandSpec& band) {
  if (ref.frequencies.size() != test.frequencies.size() ||
      std::abs(ref.dt - test.dt) > 1e-12 * ref.dt) {
    throw InvalidParameter("spectra do not share a frequency grid");
  }
  if (!(band.half_width > 0.0)) throw InvalidParameter("band half-width must be positive");
  const double w0 = find_fundamental(ref, band);
  const double hw = band.half_width * w0;
  const double denom = band_sum(ref, w0, hw);
  if (!(denom > 0.0)) throw InvalidParameter("reference spectrum has no weight in the harmonic bands");
  return band_sum(test, w0, hw) / denom;
}

double frequency_to_hz(double omega, double omega_m_hz) { return omega * omega_m_hz; }

}  // namespace chaos_anneal::analysis
