#include "afc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "afc/error.hpp"

namespace afc {

namespace {

// Runs one pipeline stage, prefixing any error with the stage name while
// keeping the error category.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  const std::string prefix = std::string(name) + ": ";
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(prefix + e.what());
  } catch (const ComputationError& e) {
    throw ComputationError(prefix + e.what());
  }
}

double peak_field_between(const PulseEnvelope& trace, double lo, double hi) {
  double peak = 0.0;
  for (Eigen::Index i = 0; i < trace.size(); ++i) {
    const double t = trace.time(i);
    if (t >= lo && t <= hi) peak = std::max(peak, std::abs(trace.samples(i)));
  }
  return peak;
}

}  // namespace

void PulseSpec::validate() const {
  require(std::isfinite(fwhm) && fwhm > 0.0, "pulse: fwhm must be positive");
  require(std::isfinite(lead) && lead >= 3.0 * fwhm, "pulse: lead must be at least 3 x fwhm");
  require(std::isfinite(carrier_detuning), "pulse: carrier detuning must be finite");
}

void StorageConfig::validate() const {
  require(comb.has_value() != burn.has_value(), "storage: exactly one of comb or burn must be given");
  if (comb) comb->validate();
  if (burn) {
    burn->sequence.validate();
    burn->line.validate();
  }
  pulse.validate();
  if (spin) spin->validate();
  require(decay_taus.empty() || spin.has_value(), "storage: a decay sweep needs a spin section");
  for (std::size_t i = 1; i < decay_taus.size(); ++i)
    require(decay_taus[i] > decay_taus[i - 1], "storage: decay taus must be strictly increasing");
  noise.validate();
  if (window_half_width) require(*window_half_width > 0.0, "storage: window half-width must be positive");
  (void)configured_period(*this);
}

double configured_period(const StorageConfig& config) {
  if (config.comb) return config.comb->delta;
  require(config.burn.has_value(), "storage: no comb preparation given");
  double delta = 0.0;
  for (const BurnStep& s : config.burn->sequence.steps)
    if (s.pattern == BurnStep::Pattern::comb) delta = s.comb_delta;
  require(delta > 0.0, "storage: burn sequence has no comb-patterned step");
  return delta;
}

StorageResult run_full_storage_experiment(const StorageConfig& config) {
  stage("validation", [&] { config.validate(); });
  const double period = configured_period(config);

  std::optional<HoleBurningResult> burned;
  StorageResult r{.profile = stage("comb-preparation", [&] {
    if (config.comb) return parametric_comb(*config.comb, config.grid);
    burned = simulate_hole_burning(config.burn->sequence, config.burn->scheme, config.burn->line, config.grid);
    return burned->profile;
  })};
  if (burned) r.populations = std::move(burned->state);
  r.comb_period = period;
  if (config.comb) r.analytic_efficiency = analytic_efficiency(*config.comb);

  stage("echo-propagation", [&] {
    r.input = gaussian_pulse_for(config.grid, config.pulse.fwhm, 0.0, -config.pulse.lead);
    r.input.carrier_detuning = config.pulse.carrier_detuning;
    r.output = propagate(r.input, r.profile);
    r.echo = echo_efficiency(r.output, r.input, 1.0 / period, config.window_half_width);
  });

  if (!config.spin) return r;

  SpinWaveOptions opts;
  opts.window_half_width = config.window_half_width;
  if (config.comb) {
    opts.comb_bandwidth = config.comb->bandwidth;
  } else {
    for (const BurnStep& s : config.burn->sequence.steps)
      if (s.pattern == BurnStep::Pattern::comb) opts.comb_bandwidth = s.width;
  }

  stage("spin-wave", [&] {
    const SpinWaveRun run = run_spin_wave(r.profile, period, r.input, *config.spin, opts);
    r.output = run.trace;
    r.spin = run.result;
  });

  if (config.decay_taus.empty()) return r;

  stage("decay-fit", [&] {
    Series s;
    s.x = Eigen::Map<const Eigen::ArrayXd>(config.decay_taus.data(),
                                           static_cast<Eigen::Index>(config.decay_taus.size()));
    s.y.resize(s.x.size());
    const double w = config.window_half_width.value_or(2.0 * intensity_fwhm(r.input));
    SpinParams spin = *config.spin;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      spin.tau_s = s.x(i);
      const SpinWaveRun run = run_spin_wave(r.profile, period, r.input, spin, opts);
      const double t_echo = peak_time(r.input) + run.result.t_total;
      const double half = std::min(w, 0.5 * spin.tau_s);
      // The residual two-level echo train keeps rephasing at multiples of
      // 1/delta and can dominate the window at long tau_s, so only the
      // retrieved spin-wave component is measured.
      const double field = peak_field_between(run.retrieved, t_echo - half, t_echo + half);
      s.y(i) = spin.amplitude_convention == AmplitudeConvention::field ? field : field * field;
    }
    r.decay = apply_noise(s, config.noise);
    r.decay_fit = fit_log_linear(*r.decay, config.spin->amplitude_convention == AmplitudeConvention::field
                                               ? DecayKind::spin_wave_field
                                               : DecayKind::spin_wave_intensity);
  });
  return r;
}

}  // namespace afc
