#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/langevin.hpp"

namespace chaos_anneal::langevin::detail {

/// Euler-Maruyama stepping shared by every trajectory driver. Noise for step k of
/// trajectory j comes from counter (k, 0) of stream j.
class TrajectoryKernel {
 public:
  TrajectoryKernel(const model::DimensionlessParams& d, const NoiseConfig& noise,
                   const meanfield::IntegrationOptions& opts)
      : d_(d),
        noise_(noise),
        opts_(opts),
        steps_(opts.steps()),
        cavity_gain_(std::sqrt(2.0 * d.kappa)),
        mechanics_gain_(std::sqrt(2.0 * d.gamma)) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t samples() const noexcept { return steps_ / opts_.stride + 1; }

  /// Calls sink(sample_index, t, state) at t = 0 and every stride steps.
  template <class Sink>
  void run(PhaseState s, std::size_t traj_index, Sink&& sink) const {
    if (traj_index > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidParameter("trajectory index exceeds the 32-bit stream space");
    }
    const rng::CounterStream stream(noise_.seed, static_cast<std::uint32_t>(traj_index));
    const double dt = opts_.dt;
    sink(std::size_t{0}, 0.0, s);
    for (std::size_t k = 1; k <= steps_; ++k) {
      if (dt * meanfield::fastest_rate(s, d_) >= opts_.stability_bound) {
        throw StepSizeError("dt too coarse for the current state at t=" +
                            std::to_string(static_cast<double>(k - 1) * dt));
      }
      const PhaseState drift = langevin_drift(s, d_);
      const auto xi = sample_step_noise(stream, k, dt, noise_.n_bar_a, noise_.n_bar_b,
                                        noise_.noise_enabled);
      s.a += drift.a * dt + cavity_gain_ * xi[0];
      s.b += drift.b * dt + mechanics_gain_ * xi[1];
      if (!(std::norm(s.a) < opts_.blowup_bound) || !(std::norm(s.b) < opts_.blowup_bound)) {
        throw DivergenceError("Langevin trajectory diverged", static_cast<double>(k - 1) * dt);
      }
      if (k % opts_.stride == 0) sink(k / opts_.stride, static_cast<double>(k) * dt, s);
    }
  }

 private:
  model::DimensionlessParams d_;
  NoiseConfig noise_;
  meanfield::IntegrationOptions opts_;
  std::size_t steps_;
  double cavity_gain_;
  double mechanics_gain_;
};

}  // namespace chaos_anneal::langevin::detail
