#include "chaos_anneal/model.hpp"

#include <cmath>
#include <string>

#include "chaos_anneal/errors.hpp"

namespace chaos_anneal::model {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void PhysicalParams::validate() const {
  require(finite(omega_m_hz) && omega_m_hz > 0.0, "omega_m must be positive");
  require(finite(quality_factor) && quality_factor > 0.0, "quality factor must be positive");
  require(finite(input_power_w) && input_power_w > 0.0, "input power must be positive");
  require(finite(kappa_hz) && kappa_hz > 0.0, "kappa must be positive");
  require(finite(kappa_in_hz) && kappa_in_hz > 0.0, "kappa_in must be positive");
  require(finite(drive_frequency_hz) && drive_frequency_hz > 0.0, "drive frequency must be positive");
  require(finite(kerr_chi_hz) && kerr_chi_hz >= 0.0, "kerr chi must be non-negative");
  require(finite(coupling_g_hz) && coupling_g_hz >= 0.0, "coupling g must be non-negative");
  require(finite(detuning_hz), "detuning must be finite");
  if (bath_temperature_k) {
    require(finite(*bath_temperature_k) && *bath_temperature_k >= 0.0,
            "bath temperature must be non-negative");
    require(!n_bar_a && !n_bar_b, "give either a bath temperature or n_bar overrides, not both");
  }
  if (n_bar_a) require(finite(*n_bar_a) && *n_bar_a >= 0.0, "n_bar_a must be non-negative");
  if (n_bar_b) require(finite(*n_bar_b) && *n_bar_b >= 0.0, "n_bar_b must be non-negative");
}

void DimensionlessParams::validate() const {
  require(finite(delta), "delta must be finite");
  require(finite(kappa) && kappa > 0.0, "kappa must be positive");
  require(finite(gamma) && gamma > 0.0, "gamma must be positive");
  require(finite(g) && g >= 0.0, "g must be non-negative");
  require(finite(chi) && chi >= 0.0, "chi must be non-negative");
  require(finite(drive) && drive >= 0.0, "drive must be non-negative");
  require(finite(n_bar_a) && n_bar_a >= 0.0, "n_bar_a must be non-negative");
  require(finite(n_bar_b) && n_bar_b >= 0.0, "n_bar_b must be non-negative");
}

ScalingTransform::ScalingTransform(double scale) : scale_(scale) {
  require(std::isfinite(scale) && scale > 0.0, "scale must be positive");
}

double drive_amplitude_from_power(double power_w, double kappa_in_angular, double omega_d_angular) {
  require(finite(power_w) && power_w >= 0.0, "power must be non-negative");
  require(finite(kappa_in_angular) && kappa_in_angular > 0.0, "kappa_in must be positive");
  require(finite(omega_d_angular) && omega_d_angular > 0.0, "drive frequency must be positive");
  return std::sqrt(2.0 * kappa_in_angular * power_w / (kHbar * omega_d_angular));
}

double thermal_occupation(double omega_angular, double temperature_k) {
  require(finite(omega_angular) && omega_angular > 0.0, "mode frequency must be positive");
  require(finite(temperature_k) && temperature_k >= 0.0, "temperature must be non-negative");
  if (temperature_k == 0.0) return 0.0;
  const double x = kHbar * omega_angular / (kBoltzmann * temperature_k);
  return 1.0 / std::expm1(x);
}

DimensionlessParams to_dimensionless(const PhysicalParams& p) {
  p.validate();
  const double omega_m = kTwoPi * p.omega_m_hz;
  DimensionlessParams d;
  // Ratios of ordinary frequencies equal ratios of angular ones.
  d.delta = p.detuning_hz / p.omega_m_hz;
  d.kappa = p.kappa_hz / p.omega_m_hz;
  d.gamma = 1.0 / p.quality_factor;
  d.g = p.coupling_g_hz / p.omega_m_hz;
  d.chi = p.kerr_chi_hz / p.omega_m_hz;
  d.drive = drive_amplitude_from_power(p.input_power_w, kTwoPi * p.kappa_in_hz,
                                       kTwoPi * p.drive_frequency_hz) /
            omega_m;
  if (p.bath_temperature_k) {
    // The cavity frequency is not a model input; the drive frequency stands in for it.
    d.n_bar_a = thermal_occupation(kTwoPi * p.drive_frequency_hz, *p.bath_temperature_k);
    d.n_bar_b = thermal_occupation(omega_m, *p.bath_temperature_k);
  } else {
    d.n_bar_a = p.n_bar_a.value_or(0.0);
    d.n_bar_b = p.n_bar_b.value_or(0.0);
  }
  d.validate();
  return d;
}

DimensionlessParams apply_scaling(const DimensionlessParams& d, const ScalingTransform& s) {
  if (!(d.g > 0.0)) throw ScalingUndefined("scaling requires g > 0");
  DimensionlessParams out = d;
  const double k = s.scale();
  out.g = k * d.g;
  out.drive = d.drive / k;
  out.chi = k * k * d.chi;
  return out;
}

}  // namespace chaos_anneal::model
