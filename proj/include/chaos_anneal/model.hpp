#pragma once

#include <optional>

namespace chaos_anneal::model {

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Laboratory parameters. Every frequency is an ordinary frequency nu = omega / 2pi in Hz.
struct PhysicalParams {
  double omega_m_hz = 0.0;          // mechanical frequency
  double quality_factor = 0.0;      // Q = omega_m / gamma
  double input_power_w = 0.0;
  double kerr_chi_hz = 0.0;
  double kappa_hz = 0.0;
  double kappa_in_hz = 0.0;
  double drive_frequency_hz = 0.0;
  double coupling_g_hz = 0.0;
  double detuning_hz = 0.0;         // signed
  std::optional<double> bath_temperature_k;
  std::optional<double> n_bar_a;
  std::optional<double> n_bar_b;

  /// Throws InvalidParameter when an invariant is violated.
  void validate() const;
};

/// Rates in units of the mechanical angular frequency (omega_m = 1).
struct DimensionlessParams {
  double delta = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double g = 0.0;
  double chi = 0.0;
  double drive = 0.0;  // E
  double n_bar_a = 0.0;
  double n_bar_b = 0.0;

  void validate() const;

  /// C1 = g E
  double c1() const noexcept { return g * drive; }
  /// C2 = chi / g^2
  double c2() const noexcept { return chi / (g * g); }

  friend bool operator==(const DimensionlessParams&, const DimensionlessParams&) = default;
};

/// Multiplier applied to g under the (g, E, chi) -> (s g, E / s, s^2 chi) map.
class ScalingTransform {
 public:
  explicit ScalingTransform(double scale);
  double scale() const noexcept { return scale_; }
  ScalingTransform inverse() const { return ScalingTransform(1.0 / scale_); }

 private:
  double scale_;
};

/// E = sqrt(2 kappa_in P / (hbar omega_d)); angular inputs, angular output.
double drive_amplitude_from_power(double power_w, double kappa_in_angular, double omega_d_angular);

/// Bose-Einstein occupation 1 / (exp(hbar omega / k_B T) - 1). Exactly 0 at T = 0.
double thermal_occupation(double omega_angular, double temperature_k);

DimensionlessParams to_dimensionless(const PhysicalParams& p);

DimensionlessParams apply_scaling(const DimensionlessParams& d, const ScalingTransform& s);

}  // namespace chaos_anneal::model
