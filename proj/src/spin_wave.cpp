#include "afc/spin_wave.hpp"

#include <cmath>
#include <numbers>

#include "afc/error.hpp"
#include "afc/numeric.hpp"

namespace afc {

std::string_view to_string(AmplitudeConvention c) { return c == AmplitudeConvention::field ? "field" : "intensity"; }

AmplitudeConvention amplitude_convention_from_string(std::string_view name) {
  if (name == "field") return AmplitudeConvention::field;
  if (name == "intensity") return AmplitudeConvention::intensity;
  throw ConfigError("unknown amplitude convention '" + std::string(name) + "'");
}

void SpinParams::validate() const {
  require(std::isfinite(gamma_s) && gamma_s >= 0.0, "SpinParams: gamma_s must be >= 0");
  require(std::isfinite(eta_t) && eta_t >= 0.0 && eta_t <= 1.0, "SpinParams: eta_t must lie in [0,1]");
  require(std::isfinite(tau_c) && tau_c > 0.0, "SpinParams: tau_c must be positive");
  require(std::isfinite(tau_s) && tau_s >= 0.0, "SpinParams: tau_s must be >= 0");
  require(std::isfinite(chirp_bandwidth) && chirp_bandwidth > 0.0, "SpinParams: chirp bandwidth must be positive");
}

double spin_dephasing_factor(double gamma_s, double tau_s) {
  require(gamma_s >= 0.0 && tau_s >= 0.0, "spin_dephasing_factor: inputs must be >= 0");
  return std::exp(-std::numbers::pi * gamma_s * tau_s);
}

PulseEnvelope delay(const PulseEnvelope& pulse, double tau) {
  pulse.validate();
  PulseEnvelope out = pulse;
  const Eigen::Index n = pulse.size();
  const double steps = tau / pulse.dt;
  const double whole = std::round(steps);
  if (std::abs(steps - whole) < 1e-9) {
    const auto s = static_cast<Eigen::Index>(whole);
    out.samples.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = i + s;
      if (j >= 0 && j < n) out.samples(j) = pulse.samples(i);
    }
    return out;
  }
  // Band-limited shift: multiply the spectrum by the delay phase.
  ArrayXc<double> spec = to_frequency<double>(pulse.samples);
  const double df = 1.0 / (static_cast<double>(n) * pulse.dt);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nu = static_cast<double>(j < n / 2 ? j : j - n) * df;
    spec(j) *= std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * nu * tau));
  }
  out.samples = to_time<double>(spec);
  // Drop whatever wrapped around the circular window.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double src = static_cast<double>(i) - steps;
    if (src < 0.0 || src > static_cast<double>(n - 1)) out.samples(i) = 0.0;
  }
  return out;
}

SpinWaveRun run_spin_wave(const AbsorptionProfile& profile, double comb_period, const PulseEnvelope& pulse,
                          const SpinParams& spin, const SpinWaveOptions& options) {
  spin.validate();
  require(comb_period > 0.0, "run_spin_wave: comb period must be positive");
  if (options.comb_bandwidth)
    require(*options.comb_bandwidth <= spin.chirp_bandwidth * (1.0 + 1e-12),
            "run_spin_wave: comb bandwidth exceeds the control chirp bandwidth");

  const double storage = 1.0 / comb_period;
  const double t_in = peak_time(pulse);
  const double w = options.window_half_width.value_or(2.0 * intensity_fwhm(pulse));
  require(w > 0.0, "run_spin_wave: window half-width must be positive");

  // Control slot 1 starts at the end of the input window and must finish
  // before the two-level echo window opens; slot 2 is slot 1 delayed by
  // tau_s and then clears the spin-wave echo window by the same margin.
  const double slot1_start = t_in + w;
  const double slot1_end = slot1_start + spin.tau_c;
  if (slot1_end > t_in + storage - w)
    throw PreconditionError("run_spin_wave: control pulse overlaps the input or echo window");
  if (spin.eta_t > 0.0 && spin.tau_s < spin.tau_c)
    throw PreconditionError("run_spin_wave: tau_s shorter than the control duration, controls would overlap");

  SpinWaveRun run;
  run.two_level = propagate(pulse, profile);
  const double t_split = slot1_start + 0.5 * spin.tau_c;

  PulseEnvelope stored = run.two_level;
  run.trace = run.two_level;
  for (Eigen::Index i = 0; i < stored.size(); ++i) {
    if (stored.time(i) < t_split) {
      stored.samples(i) = 0.0;
    } else {
      run.trace.samples(i) = 0.0;
    }
  }
  const double dephase = spin_dephasing_factor(spin.gamma_s, spin.tau_s);
  run.retrieved = delay(stored, spin.tau_s);
  run.retrieved.samples *= spin.eta_t * dephase;
  run.trace.samples += (1.0 - spin.eta_t) * stored.samples + run.retrieved.samples;

  SpinWaveResult& r = run.result;
  r.t_total = spin.tau_s + storage;
  r.control1_time = t_split;
  r.control2_time = t_split + spin.tau_s;
  r.echo_amplitude = spin.eta_t * dephase;
  r.suppressed_two_level_fraction = (1.0 - spin.eta_t) * (1.0 - spin.eta_t);

  const EchoReport two_level = echo_efficiency(run.two_level, pulse, t_in + storage, w);
  r.two_level_efficiency = two_level.echo_efficiency;

  // Keep the spin-wave window clear of the residual two-level echo.
  const double w_sw = spin.eta_t < 1.0 && spin.tau_s > 0.0 ? std::min(w, 0.5 * spin.tau_s) : w;
  const EchoReport sw = echo_efficiency(run.trace, pulse, t_in + r.t_total, w_sw);
  r.echo_efficiency = sw.echo_efficiency;
  r.echo_time = sw.echo_time;
  return run;
}

SpinWaveRun run_spin_wave(const CombParams& comb, const FrequencyGrid& grid, const PulseEnvelope& pulse,
                          const SpinParams& spin, std::optional<double> window_half_width) {
  SpinWaveOptions opts;
  opts.window_half_width = window_half_width;
  opts.comb_bandwidth = comb.bandwidth;
  return run_spin_wave(parametric_comb(comb, grid), comb.delta, pulse, spin, opts);
}

Series decay_series(const SpinParams& spin, const std::vector<double>& tau_s_list, double base_amplitude) {
  require(spin.gamma_s >= 0.0, "decay_series: gamma_s must be >= 0");
  for (std::size_t i = 1; i < tau_s_list.size(); ++i)
    require(tau_s_list[i] > tau_s_list[i - 1], "decay_series: tau_s list must be strictly increasing");
  Series out;
  out.x = Eigen::Map<const Eigen::ArrayXd>(tau_s_list.data(), static_cast<Eigen::Index>(tau_s_list.size()));
  out.y = out.x.unaryExpr([&](double tau) {
    const double a = spin_dephasing_factor(spin.gamma_s, tau);
    return base_amplitude * (spin.amplitude_convention == AmplitudeConvention::field ? a : a * a);
  });
  return out;
}

}  // namespace afc
