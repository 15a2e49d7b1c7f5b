#include "chaos_anneal/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "chaos_anneal/errors.hpp"

namespace chaos_anneal {

std::vector<double> Trajectory::intensity() const {
  std::vector<double> out(states.size());
  std::transform(states.begin(), states.end(), out.begin(),
                 [](const PhaseState& s) { return std::norm(s.a); });
  return out;
}

}  // namespace chaos_anneal

namespace chaos_anneal::meanfield {

void IntegrationOptions::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be positive");
  if (stride == 0) throw InvalidParameter("stride must be at least 1");
  if (!(blowup_bound > 0.0)) throw InvalidParameter("blow-up bound must be positive");
}

std::size_t IntegrationOptions::steps() const {
  // Tolerate t_end being a float-rounded multiple of dt.
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
}

PhaseState meanfield_rhs(const PhaseState& s, const model::DimensionlessParams& d) {
  const double intensity = std::norm(s.a);
  const double shift = d.delta + d.g * 2.0 * s.b.real() + 2.0 * d.chi * intensity;
  PhaseState out;
  out.a = complex(-d.kappa, shift) * s.a + d.drive;
  out.b = complex(-d.gamma, -1.0) * s.b + complex(0.0, d.g * intensity);
  return out;
}

double fastest_rate(const PhaseState& s, const model::DimensionlessParams& d) {
  const double detuning = std::abs(d.delta) + 2.0 * d.g * std::sqrt(std::norm(s.b)) + 2.0 * d.chi * std::norm(s.a);
  return std::max({d.kappa, detuning, 1.0});
}

Trajectory integrate_meanfield(const model::DimensionlessParams& d, PhaseState s0,
                               const IntegrationOptions& opts) {
  opts.validate();
  const std::size_t n = opts.steps();
  const double dt = opts.dt;

  Trajectory out;
  out.times.reserve(n / opts.stride + 1);
  out.states.reserve(n / opts.stride + 1);
  out.times.push_back(0.0);
  out.states.push_back(s0);

  PhaseState s = s0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (dt * fastest_rate(s, d) >= opts.stability_bound) {
      throw StepSizeError("dt too coarse for the current state at t=" +
                          std::to_string((k - 1) * dt));
    }
    const PhaseState k1 = meanfield_rhs(s, d);
    const PhaseState k2 = meanfield_rhs(s + (0.5 * dt) * k1, d);
    const PhaseState k3 = meanfield_rhs(s + (0.5 * dt) * k2, d);
    const PhaseState k4 = meanfield_rhs(s + dt * k3, d);
    const PhaseState next = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double na = std::norm(next.a);
    const double nb = std::norm(next.b);
    if (!(na < opts.blowup_bound) || !(nb < opts.blowup_bound)) {
      throw DivergenceError("mean-field trajectory diverged", (k - 1) * dt);
    }
    s = next;
    if (k % opts.stride == 0) {
      out.times.push_back(static_cast<double>(k) * dt);
      out.states.push_back(s);
    }
  }
  return out;
}

PhaseState linear_steady_state(const model::DimensionlessParams& d) {
  if (d.g != 0.0 || d.chi != 0.0) {
    throw MisuseError("linear steady state requires g = chi = 0");
  }
  return {d.drive / complex(d.kappa, -d.delta), complex{}};
}

}  // namespace chaos_anneal::meanfield
