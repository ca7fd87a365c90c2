#pragma once

// Synthetic measurements with controlled noise and the fits that recover the
// physical constants from them: two-pulse echo T2, spin-wave decay gamma_s and
// interference visibility V.

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

#include "afc/numeric.hpp"

namespace afc {

struct NoiseModel {
  enum class Kind { additive_gaussian, multiplicative_gaussian };

  Kind kind = Kind::multiplicative_gaussian;
  double sigma = 0.03;
  std::uint64_t seed = 0;

  void validate() const;
  /// Multiplicative: y (1 + sigma eps). Additive: y + sigma * max|y| * eps.
  Eigen::ArrayXd apply(const Eigen::ArrayXd& values) const;
  NoiseModel with_seed(std::uint64_t s) const;
};

std::string_view to_string(NoiseModel::Kind kind);
NoiseModel::Kind noise_kind_from_string(std::string_view name);

/// Independent per-replica seed derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

enum class DecayKind {
  generic,              // derived constant = 1/rate
  two_pulse_echo,       // A = A0 exp(-2t/T2): T2 = 2/rate
  spin_wave_field,      // A = A0 exp(-pi gamma_s tau): gamma_s = rate/pi
  spin_wave_intensity,  // I = I0 exp(-2 pi gamma_s tau): gamma_s = rate/(2 pi)
};

struct DecayFit {
  DecayKind kind = DecayKind::generic;
  double rate = 0.0;  // 1/us, = -slope of ln(amplitude)
  double intercept = 0.0;  // ln(amplitude) at x = 0
  double stderr_rate = 0.0;
  double stderr_intercept = 0.0;
  double derived_constant = 0.0;  // T2 (us) or gamma_s (MHz)
  double derived_stderr = 0.0;
  bool unbounded = false;  // rate <= 0: derived time constant is infinite
};

/// Ordinary least squares of ln(amplitude) against x. Needs >= 3 points and
/// strictly positive amplitudes.
DecayFit fit_log_linear(const Series& points, DecayKind kind = DecayKind::generic);

/// A0 exp(-2 t / T2) at each pulse spacing, with noise applied.
Series simulate_two_pulse_echo(double t2, const std::vector<double>& spacings, const NoiseModel& noise,
                               double a0 = 1.0);

/// Noisy amplitudes of a decay curve (e.g. decay_series output).
Series apply_noise(const Series& clean, const NoiseModel& noise);

struct FringeFit {
  double i_max = 0.0;
  double visibility = 0.0;
  double phi0 = 0.0;  // radians
  double stderr_v = 0.0;
  double stderr_phi0 = 0.0;
};

/// I(phi) = i_echo + i_ref + 2 mu sqrt(i_echo i_ref) sin(phi + phi0).
Series simulate_interference(double i_echo, double i_ref, double overlap, double phi0,
                             const std::vector<double>& phases, const NoiseModel& noise);

/// Phases on [0, 2 pi) with the given step in degrees.
std::vector<double> phase_scan(double step_degrees);

/// Linear least squares on {1, sin phi, cos phi}; the model
/// (i_max/2)[1 + V sin(phi + phi0)] follows from a + b sin + c cos with
/// i_max = 2a, V = sqrt(b^2 + c^2)/a, phi0 = atan2(c, b). Errors by the delta
/// method on the coefficient covariance. V is capped at 1.
FringeFit fit_fringe(const Series& points);

}  // namespace afc
