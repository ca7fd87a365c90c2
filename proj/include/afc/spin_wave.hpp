#pragma once

// Spin-wave AFC storage: two control transfers shelve the optical coherence in
// an empty ground level for tau_s, during which the comb rephasing is frozen
// and the spin inhomogeneous broadening dephases the stored excitation.

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "afc/comb.hpp"
#include "afc/echo.hpp"
#include "afc/numeric.hpp"

namespace afc {

/// What a recorded "echo amplitude" means: the field itself, or the detected
/// intensity (field squared). Decay rates differ by a factor of two.
enum class AmplitudeConvention { field, intensity };

std::string_view to_string(AmplitudeConvention c);
AmplitudeConvention amplitude_convention_from_string(std::string_view name);

struct SpinParams {
  double gamma_s = 0.0;  // spin inhomogeneous FWHM (MHz, Lorentzian)
  double eta_t = 1.0;    // population transfer per control pulse
  double tau_c = 2.5;    // control pulse duration (us)
  double tau_s = 0.0;    // time between the two control pulses (us)
  double chirp_bandwidth = 2.0;  // control chirp bandwidth (MHz)
  AmplitudeConvention amplitude_convention = AmplitudeConvention::field;

  void validate() const;
};

/// Field amplitude factor exp(-pi * gamma_s * tau_s) of a Lorentzian spin
/// distribution with FWHM gamma_s.
double spin_dephasing_factor(double gamma_s, double tau_s);

struct SpinWaveResult {
  double t_total = 0.0;         // tau_s + 1/delta, relative to the input peak
  double echo_time = 0.0;       // measured centroid (absolute time)
  double echo_amplitude = 0.0;  // spin-wave echo field relative to the two-level echo
  double echo_efficiency = 0.0;
  double two_level_efficiency = 0.0;  // reference echo without any control pulse
  double suppressed_two_level_fraction = 0.0;  // residual two-level echo intensity factor
  double control1_time = 0.0;  // transfer instants (absolute)
  double control2_time = 0.0;
};

struct SpinWaveRun {
  PulseEnvelope trace;      // full output with both echoes
  PulseEnvelope two_level;  // output of the bare two-level AFC
  PulseEnvelope retrieved;  // spin-wave component of `trace` alone
  SpinWaveResult result;
};

struct SpinWaveOptions {
  std::optional<double> window_half_width;  // default: 2x input FWHM
  std::optional<double> comb_bandwidth;     // checked against the chirp bandwidth when known
};

/// Runs the spin-wave sequence on a propagated two-level output. The control
/// transfers are instantaneous at the center of each control slot: the first
/// slot starts where the input window ends. The output after the first
/// transfer is kept with field factor (1 - eta_t) at its original time and
/// re-emitted tau_s later with field factor eta_t * spin_dephasing_factor.
SpinWaveRun run_spin_wave(const AbsorptionProfile& profile, double comb_period, const PulseEnvelope& pulse,
                          const SpinParams& spin, const SpinWaveOptions& options = {});

SpinWaveRun run_spin_wave(const CombParams& comb, const FrequencyGrid& grid, const PulseEnvelope& pulse,
                          const SpinParams& spin, std::optional<double> window_half_width = std::nullopt);

/// Delays a trace by tau, filling with zeros. Whole-sample delays are exact;
/// fractional ones use a band-limited (Fourier) shift.
PulseEnvelope delay(const PulseEnvelope& pulse, double tau);

/// base_amplitude * exp(-pi gamma_s tau) for the field convention, the square
/// of that for the intensity convention.
Series decay_series(const SpinParams& spin, const std::vector<double>& tau_s_list, double base_amplitude);

}  // namespace afc
