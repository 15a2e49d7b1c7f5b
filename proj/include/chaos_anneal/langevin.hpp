#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chaos_anneal/meanfield.hpp"
#include "chaos_anneal/model.hpp"
#include "chaos_anneal/rng.hpp"

namespace chaos_anneal::langevin {

/// Bath occupations and the master seed for the c-number noise.
struct NoiseConfig {
  double n_bar_a = 0.0;
  double n_bar_b = 0.0;
  std::uint64_t seed = 0;
  bool noise_enabled = true;
};

struct EnsembleConfig {
  std::size_t n_traj = 1;
  meanfield::IntegrationOptions integration;
  PhaseState initial{};
  std::vector<double> snapshot_times;   // must lie on the sampled grid
  bool keep_b_snapshots = false;
  bool drop_divergent = false;
  std::size_t keep_trajectories = 0;    // first k trajectories returned in full
  int workers = 0;                      // 0: OpenMP default
};

/// Real observables recorded per trajectory at each sample.
enum class Observable : std::size_t { re_a = 0, im_a, re_b, im_b, intensity_a, intensity_b };
inline constexpr std::size_t kObservableCount = 6;
using ObservableRow = std::array<double, kObservableCount>;

ObservableRow observables_of(const PhaseState& s) noexcept;

/// Count, sums and cross sums of the observables. Merging is addition, so a fixed
/// merge order gives bit-identical results however the trajectories were scheduled.
class MomentAccumulator {
 public:
  void add(const ObservableRow& row) noexcept;
  void merge(const MomentAccumulator& other) noexcept;

  std::size_t count() const noexcept { return count_; }
  double sum(Observable o) const noexcept { return sum_[idx(o)]; }
  double mean(Observable o) const;
  /// N^-1 sum o^2 - (N^-1 sum o)^2
  double variance(Observable o) const;
  /// N^-1 sum o1 o2 - means product
  double correlation(Observable o1, Observable o2) const;

 private:
  static constexpr std::size_t idx(Observable o) noexcept { return static_cast<std::size_t>(o); }
  static constexpr std::size_t pair(std::size_t i, std::size_t j) noexcept {
    return i <= j ? i * kObservableCount + j : j * kObservableCount + i;
  }

  std::size_t count_ = 0;
  std::array<double, kObservableCount> sum_{};
  std::array<double, kObservableCount * kObservableCount> cross_{};
};

struct Snapshot {
  double time = 0.0;
  std::size_t sample_index = 0;
  std::vector<complex> a;  // one entry per used trajectory, index order
  std::vector<complex> b;  // empty unless keep_b_snapshots
};

struct DivergenceRecord {
  std::size_t trajectory = 0;
  double last_valid_time = 0.0;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<MomentAccumulator> moments;  // one per time
  std::vector<Snapshot> snapshots;
  std::vector<Trajectory> sample_trajectories;
  std::vector<DivergenceRecord> divergent;

  std::size_t used_trajectories() const;
  complex mean_a(std::size_t k) const;
  complex mean_b(std::size_t k) const;
  /// N^-1 sum |a|^2; estimates the symmetrically ordered moment <a^dag a> + 1/2.
  double mean_intensity(std::size_t k) const;
  /// mean_intensity - 1/2
  double photon_number(std::size_t k) const;
  /// <|a|^2> - |<a>|^2
  double variance_a(std::size_t k) const;
  double variance_b(std::size_t k) const;

  std::vector<double> mean_intensity_series() const;
  std::vector<double> photon_number_series() const;
};

/// Drift of the c-number equations; differs from the mean-field drift by the -1/2 in the
/// mechanical force.
PhaseState langevin_drift(const PhaseState& s, const model::DimensionlessParams& d);

/// Complex Gaussian increment with E[xi] = 0, E[|xi|^2] = (n_bar + 1/2) dt, E[xi^2] = 0.
complex sample_noise_increment(const rng::CounterStream& stream, std::uint64_t step,
                               std::uint32_t slot, double dt, double n_bar, bool enabled);

/// Cavity (first) and mechanical (second) increments for one step; both come from slot 0
/// of the stream so one generator block usually serves the whole step.
std::array<complex, 2> sample_step_noise(const rng::CounterStream& stream, std::uint64_t step,
                                         double dt, double n_bar_a, double n_bar_b, bool enabled);

/// One Euler-Maruyama trajectory. The stream is keyed by (seed, traj_index).
Trajectory simulate_trajectory(const model::DimensionlessParams& d, const NoiseConfig& noise,
                               const meanfield::IntegrationOptions& opts, PhaseState initial,
                               std::size_t traj_index);

/// OpenMP ensemble; trajectories are reduced in index order.
EnsembleResult simulate_ensemble(const model::DimensionlessParams& d, const NoiseConfig& noise,
                                 const EnsembleConfig& cfg);

namespace reference {
/// Single-threaded twin of simulate_ensemble; must agree bit for bit.
EnsembleResult simulate_ensemble(const model::DimensionlessParams& d, const NoiseConfig& noise,
                                 const EnsembleConfig& cfg);
}  // namespace reference

double ensemble_mean(std::span<const double> samples);
complex ensemble_mean(std::span<const complex> samples);
double ensemble_variance(std::span<const double> samples);
/// <|o|^2> - |<o>|^2
double ensemble_variance(std::span<const complex> samples);
double ensemble_correlation(std::span<const double> o1, std::span<const double> o2);

struct HistogramSpec {
  double h = 0.0;
  double x_min = 0.0, x_max = 0.0;  // Re
  double p_min = 0.0, p_max = 0.0;  // Im
};

/// Counts over half-open bins (lo, lo + h]; density = counts / (N h^2).
struct PhaseHistogram {
  HistogramSpec spec;
  std::size_t nx = 0, np = 0;
  std::size_t n_samples = 0;
  std::vector<std::uint64_t> counts;  // nx * np, x-major
  std::vector<double> density;

  std::uint64_t count(std::size_t ix, std::size_t ip) const { return counts[ix * np + ip]; }
  std::uint64_t in_range() const;
  double x_center(std::size_t ix) const { return spec.x_min + (static_cast<double>(ix) + 0.5) * spec.h; }
  double p_center(std::size_t ip) const { return spec.p_min + (static_cast<double>(ip) + 0.5) * spec.h; }
  /// Riemann sum of the density, equals in_range() / n_samples.
  double mass() const;
};

PhaseHistogram phase_space_histogram(std::span<const complex> samples, const HistogramSpec& spec);

/// Bin width giving at least min_bins across the smaller extent of `reference`, with
/// ranges covering both point sets and aligned to whole bins.
HistogramSpec default_histogram_spec(std::span<const complex> reference,
                                     std::span<const complex> samples, std::size_t min_bins = 100);

/// Fraction of histogram mass whose bin centre lies within `radius` of the polyline
/// through `attractor` (consecutive points joined).
double attractor_overlap(const PhaseHistogram& hist, std::span<const complex> attractor,
                         double radius);

}  // namespace chaos_anneal::langevin
