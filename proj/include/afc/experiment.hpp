#pragma once

// End-to-end storage run: comb preparation, propagation of the input pulse,
// optional spin-wave transfer and an optional spin-wave decay sweep with fit.

#include <optional>
#include <vector>

#include "afc/comb.hpp"
#include "afc/echo.hpp"
#include "afc/fitting.hpp"
#include "afc/spectral.hpp"
#include "afc/spin_wave.hpp"

namespace afc {

/// Gaussian input peaking at t = 0; the time window starts `lead` earlier.
struct PulseSpec {
  double fwhm = 0.75;  // us, intensity FWHM
  double lead = 6.0;   // us
  double carrier_detuning = 0.0;

  void validate() const;
};

struct BurnSetup {
  BurnSequence sequence;
  HyperfineScheme scheme;
  InhomogeneousLine line;
};

struct StorageConfig {
  FrequencyGrid grid = FrequencyGrid::with_spacing(0.125 / 64, 8192);
  std::optional<CombParams> comb;  // exactly one of comb / burn
  std::optional<BurnSetup> burn;
  PulseSpec pulse;
  std::optional<SpinParams> spin;   // absent: plain two-level AFC
  std::vector<double> decay_taus;  // spin storage times for the decay sweep (needs spin)
  NoiseModel noise;
  std::optional<double> window_half_width;

  void validate() const;
};

struct StorageResult {
  AbsorptionProfile profile;
  std::optional<PopulationState> populations{};  // only for burn preparation
  double comb_period = 0.0;
  PulseEnvelope input{};
  PulseEnvelope output{};  // final trace (spin-wave trace when spin is set)
  EchoReport echo{};       // two-level echo at 1/delta
  std::optional<double> analytic_efficiency{};  // parametric combs only
  std::optional<SpinWaveResult> spin{};
  std::optional<Series> decay{};  // retrieved spin-wave echo peak vs tau_s, noise applied
  std::optional<DecayFit> decay_fit{};
};

/// Comb period of the preparation: delta of a parametric comb, or that of the
/// last comb-patterned burn step.
double configured_period(const StorageConfig& config);

/// Errors from each stage are rethrown with the stage named in the message.
StorageResult run_full_storage_experiment(const StorageConfig& config);

}  // namespace afc
