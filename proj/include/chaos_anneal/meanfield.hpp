#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "chaos_anneal/model.hpp"

namespace chaos_anneal {

using complex = std::complex<double>;

/// Cavity and mechanical amplitudes.
struct PhaseState {
  complex a{};
  complex b{};

  friend PhaseState operator+(PhaseState l, const PhaseState& r) { return {l.a + r.a, l.b + r.b}; }
  friend PhaseState operator*(double k, const PhaseState& s) { return {k * s.a, k * s.b}; }
  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Sampled trajectory; times strictly increasing, one state per time.
struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;

  std::size_t size() const noexcept { return times.size(); }
  /// |a|^2 at every sample.
  std::vector<double> intensity() const;
};

}  // namespace chaos_anneal

namespace chaos_anneal::meanfield {

/// Fixed-step integration settings shared by the deterministic and stochastic integrators.
struct IntegrationOptions {
  double t_end = 0.0;
  double dt = 1e-3;
  std::size_t stride = 1;         // keep every stride-th step
  double blowup_bound = 1e16;     // on |a|^2 and |b|^2
  double stability_bound = 0.1;   // dt * fastest rate must stay below this

  void validate() const;
  std::size_t steps() const;
};

PhaseState meanfield_rhs(const PhaseState& s, const model::DimensionlessParams& d);

/// Largest instantaneous rate in the drift at state s; used for the adaptive dt check.
double fastest_rate(const PhaseState& s, const model::DimensionlessParams& d);

/// Classical RK4. Throws DivergenceError on blow-up and StepSizeError if dt is too coarse.
Trajectory integrate_meanfield(const model::DimensionlessParams& d, PhaseState s0,
                               const IntegrationOptions& opts);

/// Analytic steady state for g = chi = 0: (E / (kappa - i Delta), 0).
PhaseState linear_steady_state(const model::DimensionlessParams& d);

}  // namespace chaos_anneal::meanfield
