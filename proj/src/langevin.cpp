#include "chaos_anneal/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/langevin_kernel.hpp"

namespace chaos_anneal::langevin {

ObservableRow observables_of(const PhaseState& s) noexcept {
  return {s.a.real(), s.a.imag(), s.b.real(), s.b.imag(), std::norm(s.a), std::norm(s.b)};
}

void MomentAccumulator::add(const ObservableRow& row) noexcept {
  ++count_;
  for (std::size_t i = 0; i < kObservableCount; ++i) {
    sum_[i] += row[i];
    for (std::size_t j = i; j < kObservableCount; ++j) cross_[pair(i, j)] += row[i] * row[j];
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
  count_ += other.count_;
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
  for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += other.cross_[i];
}

double MomentAccumulator::mean(Observable o) const {
  if (count_ == 0) throw InvalidParameter("statistics of an empty ensemble");
  return sum_[idx(o)] / static_cast<double>(count_);
}

double MomentAccumulator::variance(Observable o) const { return correlation(o, o); }

double MomentAccumulator::correlation(Observable o1, Observable o2) const {
  if (count_ == 0) throw InvalidParameter("statistics of an empty ensemble");
  const double n = static_cast<double>(count_);
  return cross_[pair(idx(o1), idx(o2))] / n - (sum_[idx(o1)] / n) * (sum_[idx(o2)] / n);
}

std::size_t EnsembleResult::used_trajectories() const {
  return moments.empty() ? 0 : moments.front().count();
}

complex EnsembleResult::mean_a(std::size_t k) const {
  return {moments.at(k).mean(Observable::re_a), moments.at(k).mean(Observable::im_a)};
}

complex EnsembleResult::mean_b(std::size_t k) const {
  return {moments.at(k).mean(Observable::re_b), moments.at(k).mean(Observable::im_b)};
}

double EnsembleResult::mean_intensity(std::size_t k) const {
  return moments.at(k).mean(Observable::intensity_a);
}

double EnsembleResult::photon_number(std::size_t k) const { return mean_intensity(k) - 0.5; }

double EnsembleResult::variance_a(std::size_t k) const {
  return mean_intensity(k) - std::norm(mean_a(k));
}

double EnsembleResult::variance_b(std::size_t k) const {
  return moments.at(k).mean(Observable::intensity_b) - std::norm(mean_b(k));
}

std::vector<double> EnsembleResult::mean_intensity_series() const {
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mean_intensity(k);
  return out;
}

std::vector<double> EnsembleResult::photon_number_series() const {
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = photon_number(k);
  return out;
}

PhaseState langevin_drift(const PhaseState& s, const model::DimensionlessParams& d) {
  const double intensity = std::norm(s.a);
  const double shift = d.delta + 2.0 * d.g * s.b.real() + 2.0 * d.chi * intensity;
  PhaseState out;
  out.a = complex(-d.kappa, shift) * s.a + d.drive;
  out.b = complex(-d.gamma, -1.0) * s.b + complex(0.0, d.g * (intensity - 0.5));
  return out;
}

complex sample_noise_increment(const rng::CounterStream& stream, std::uint64_t step,
                               std::uint32_t slot, double dt, double n_bar, bool enabled) {
  if (!enabled) return {};
  const double sigma = std::sqrt((n_bar + 0.5) * dt * 0.5);
  const auto z = stream.normal_pair(step, slot);
  return {sigma * z[0], sigma * z[1]};
}

std::array<complex, 2> sample_step_noise(const rng::CounterStream& stream, std::uint64_t step,
                                         double dt, double n_bar_a, double n_bar_b, bool enabled) {
  if (!enabled) return {};
  const double sigma_a = std::sqrt((n_bar_a + 0.5) * dt * 0.5);
  const double sigma_b = std::sqrt((n_bar_b + 0.5) * dt * 0.5);
  const auto z = stream.normal_quad(step, 0);
  return {complex(sigma_a * z[0], sigma_a * z[1]), complex(sigma_b * z[2], sigma_b * z[3])};
}

Trajectory simulate_trajectory(const model::DimensionlessParams& d, const NoiseConfig& noise,
                               const meanfield::IntegrationOptions& opts, PhaseState initial,
                               std::size_t traj_index) {
  opts.validate();
  Trajectory out;
  detail::TrajectoryKernel kernel(d, noise, opts);
  kernel.run(initial, traj_index, [&](std::size_t, double t, const PhaseState& s) {
    out.times.push_back(t);
    out.states.push_back(s);
  });
  return out;
}

// ---------------------------------------------------------------------------------------------

double ensemble_mean(std::span<const double> samples) {
  if (samples.empty()) throw InvalidParameter("ensemble statistic of an empty sample");
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

complex ensemble_mean(std::span<const complex> samples) {
  if (samples.empty()) throw InvalidParameter("ensemble statistic of an empty sample");
  complex s{};
  for (const complex& v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

double ensemble_variance(std::span<const double> samples) {
  const double m = ensemble_mean(samples);
  double sq = 0.0;
  for (double v : samples) sq += v * v;
  return sq / static_cast<double>(samples.size()) - m * m;
}

double ensemble_variance(std::span<const complex> samples) {
  const complex m = ensemble_mean(samples);
  double sq = 0.0;
  for (const complex& v : samples) sq += std::norm(v);
  return sq / static_cast<double>(samples.size()) - std::norm(m);
}

double ensemble_correlation(std::span<const double> o1, std::span<const double> o2) {
  if (o1.size() != o2.size()) throw InvalidParameter("correlation of samples of unequal length");
  const double m1 = ensemble_mean(o1);
  const double m2 = ensemble_mean(o2);
  double cross = 0.0;
  for (std::size_t j = 0; j < o1.size(); ++j) cross += o1[j] * o2[j];
  return cross / static_cast<double>(o1.size()) - m1 * m2;
}

// ---------------------------------------------------------------------------------------------

namespace {

std::size_t whole_bins(double lo, double hi, double h, const char* axis) {
  const double n = (hi - lo) / h;
  const double rounded = std::round(n);
  if (!(hi > lo) || rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw InvalidParameter(std::string("histogram ") + axis +
                           " range must span a whole number of bins");
  }
  return static_cast<std::size_t>(rounded);
}

// Half-open (lo + i h, lo + (i + 1) h]; nullopt when outside.
std::optional<std::size_t> bin_of(double v, double lo, double h, std::size_t n) {
  if (!(v > lo)) return std::nullopt;
  const double pos = std::ceil((v - lo) / h) - 1.0;
  if (pos < 0.0 || pos >= static_cast<double>(n)) return std::nullopt;
  return static_cast<std::size_t>(pos);
}

}  // namespace

std::uint64_t PhaseHistogram::in_range() const {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

double PhaseHistogram::mass() const {
  double total = 0.0;
  for (double v : density) total += v;
  return total * spec.h * spec.h;
}

PhaseHistogram phase_space_histogram(std::span<const complex> samples, const HistogramSpec& spec) {
  if (!(spec.h > 0.0) || !std::isfinite(spec.h)) throw InvalidParameter("histogram h must be positive");
  if (samples.empty()) throw InvalidParameter("histogram of an empty sample");
  PhaseHistogram out;
  out.spec = spec;
  out.nx = whole_bins(spec.x_min, spec.x_max, spec.h, "x");
  out.np = whole_bins(spec.p_min, spec.p_max, spec.h, "p");
  out.n_samples = samples.size();
  out.counts.assign(out.nx * out.np, 0);
  for (const complex& z : samples) {
    const auto ix = bin_of(z.real(), spec.x_min, spec.h, out.nx);
    const auto ip = bin_of(z.imag(), spec.p_min, spec.h, out.np);
    if (ix && ip) ++out.counts[*ix * out.np + *ip];
  }
  const double norm = 1.0 / (static_cast<double>(out.n_samples) * spec.h * spec.h);
  out.density.resize(out.counts.size());
  for (std::size_t i = 0; i < out.counts.size(); ++i) {
    out.density[i] = static_cast<double>(out.counts[i]) * norm;
  }
  return out;
}

HistogramSpec default_histogram_spec(std::span<const complex> reference,
                                     std::span<const complex> samples, std::size_t min_bins) {
  if (reference.empty()) throw InvalidParameter("histogram reference set is empty");
  if (min_bins == 0) throw InvalidParameter("min_bins must be positive");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, p0 = x0, p1 = -x0;
  auto extend = [&](const complex& z) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    p0 = std::min(p0, z.imag());
    p1 = std::max(p1, z.imag());
  };
  for (const complex& z : reference) extend(z);
  const double extent = std::min(x1 - x0, p1 - p0);
  if (!(extent > 0.0)) throw InvalidParameter("histogram reference set has zero extent");
  const double h = extent / static_cast<double>(min_bins);
  for (const complex& z : samples) extend(z);

  HistogramSpec spec;
  spec.h = h;
  // One spare bin on each side keeps the lower edge strictly below every sample.
  spec.x_min = (std::floor(x0 / h) - 1.0) * h;
  spec.x_max = spec.x_min + (std::ceil((x1 - spec.x_min) / h) + 1.0) * h;
  spec.p_min = (std::floor(p0 / h) - 1.0) * h;
  spec.p_max = spec.p_min + (std::ceil((p1 - spec.p_min) / h) + 1.0) * h;
  return spec;
}

double attractor_overlap(const PhaseHistogram& hist, std::span<const complex> attractor,
                         double radius) {
  if (attractor.empty()) throw InvalidParameter("attractor point set is empty");
  if (!(radius >= 0.0)) throw InvalidParameter("overlap radius must be non-negative");
  const auto total = hist.in_range();
  if (total == 0) return 0.0;

  const double h = hist.spec.h;
  std::vector<char> near(hist.counts.size(), 0);
  auto clamp_index = [](double v, std::size_t n) -> long {
    return std::clamp(static_cast<long>(std::floor(v)), 0L, static_cast<long>(n) - 1);
  };
  auto mark_segment = [&](complex p, complex q) {
    const long ix0 = clamp_index((std::min(p.real(), q.real()) - radius - hist.spec.x_min) / h, hist.nx);
    const long ix1 = clamp_index((std::max(p.real(), q.real()) + radius - hist.spec.x_min) / h, hist.nx);
    const long ip0 = clamp_index((std::min(p.imag(), q.imag()) - radius - hist.spec.p_min) / h, hist.np);
    const long ip1 = clamp_index((std::max(p.imag(), q.imag()) + radius - hist.spec.p_min) / h, hist.np);
    const complex seg = q - p;
    const double len2 = std::norm(seg);
    for (long ix = ix0; ix <= ix1; ++ix) {
      for (long ip = ip0; ip <= ip1; ++ip) {
        const std::size_t cell = static_cast<std::size_t>(ix) * hist.np + static_cast<std::size_t>(ip);
        if (near[cell]) continue;
        const complex c(hist.x_center(ix), hist.p_center(ip));
        double tproj = len2 > 0.0 ? ((c - p).real() * seg.real() + (c - p).imag() * seg.imag()) / len2 : 0.0;
        tproj = std::clamp(tproj, 0.0, 1.0);
        if (std::abs(c - (p + tproj * seg)) <= radius) near[cell] = 1;
      }
    }
  };
  if (attractor.size() == 1) mark_segment(attractor[0], attractor[0]);
  for (std::size_t i = 1; i < attractor.size(); ++i) mark_segment(attractor[i - 1], attractor[i]);

  std::uint64_t inside = 0;
  for (std::size_t i = 0; i < near.size(); ++i) {
    if (near[i]) inside += hist.counts[i];
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace chaos_anneal::langevin
