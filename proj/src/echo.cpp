#include "afc/echo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "afc/error.hpp"
#include "afc/numeric.hpp"
#include "afc/table_io.hpp"

namespace afc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Spectral energy allowed outside the inner 90% of the grid.
constexpr double kClipTolerance = 1e-6;
constexpr double kApodizationFraction = 0.05;

double interpolate_half_crossing(double x0, double y0, double x1, double y1, double half) {
  return x0 + (half - y0) / (y1 - y0) * (x1 - x0);
}

std::complex<double> expi(double x) { return {std::cos(x), std::sin(x)}; }

}  // namespace

void PulseEnvelope::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "PulseEnvelope: dt must be positive");
  require(std::isfinite(t0), "PulseEnvelope: t0 must be finite");
  require(samples.size() >= 2 && is_power_of_two(static_cast<std::size_t>(samples.size())),
          "PulseEnvelope: sample count must be a power of two");
  require(samples.allFinite(), "PulseEnvelope: samples must be finite");
  require(std::isfinite(carrier_detuning), "PulseEnvelope: carrier detuning must be finite");
}

Eigen::ArrayXd PulseEnvelope::times() const {
  return Eigen::ArrayXd::LinSpaced(size(), 0.0, static_cast<double>(size() - 1)) * dt + t0;
}

double PulseEnvelope::energy() const { return samples.abs2().sum() * dt; }

double PulseEnvelope::energy_between(double lo, double hi) const {
  double e = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double t = time(i);
    if (t >= lo && t <= hi) e += std::norm(samples(i));
  }
  return e * dt;
}

PulseEnvelope gaussian_pulse(double fwhm, double peak_time, double dt, Eigen::Index n, double t0,
                             double carrier_detuning) {
  require(fwhm > 0.0, "gaussian_pulse: fwhm must be positive");
  PulseEnvelope p;
  p.dt = dt;
  p.t0 = t0;
  p.carrier_detuning = carrier_detuning;
  p.samples.resize(n);
  // Intensity FWHM fwhm -> field exp(-2 ln2 (t - tp)^2 / fwhm^2).
  const double a = 2.0 * std::numbers::ln2 / (fwhm * fwhm);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = p.time(i) - peak_time;
    p.samples(i) = std::exp(-a * x * x);
  }
  p.validate();
  return p;
}

PulseEnvelope gaussian_pulse_for(const FrequencyGrid& grid, double fwhm, double peak_time, double t0) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  return gaussian_pulse(fwhm, peak_time, 1.0 / (static_cast<double>(n) * grid.spacing()), n, t0);
}

double peak_time(const PulseEnvelope& pulse) {
  const Eigen::ArrayXd I = pulse.intensity();
  Eigen::Index k{};
  I.maxCoeff(&k);
  double t = pulse.time(k);
  if (k > 0 && k + 1 < I.size()) {
    const double curv = I(k - 1) - 2.0 * I(k) + I(k + 1);
    if (curv < 0.0) t += 0.5 * (I(k - 1) - I(k + 1)) / curv * pulse.dt;
  }
  return t;
}

double intensity_fwhm(const PulseEnvelope& pulse) {
  const Eigen::ArrayXd I = pulse.intensity();
  Eigen::Index k{};
  const double top = I.maxCoeff(&k);
  if (!(top > 0.0)) throw ComputationError("intensity_fwhm: pulse is identically zero");
  const double half = 0.5 * top;
  Eigen::Index lo = k, hi = k;
  while (lo > 0 && I(lo) >= half) --lo;
  while (hi + 1 < I.size() && I(hi) >= half) ++hi;
  if (I(lo) >= half || I(hi) >= half) throw ComputationError("intensity_fwhm: pulse not contained in its window");
  const double left = interpolate_half_crossing(pulse.time(lo), I(lo), pulse.time(lo + 1), I(lo + 1), half);
  const double right = interpolate_half_crossing(pulse.time(hi - 1), I(hi - 1), pulse.time(hi), I(hi), half);
  return right - left;
}

PhaseResponse kk_phase(const AbsorptionProfile& profile) {
  profile.validate();
  PhaseResponse r;
  // A frequency-independent floor has no dispersion: only the part varying
  // above the lower edge value goes through the Hilbert transform.
  const Eigen::Index n = profile.depth.size();
  const double floor = std::min(profile.depth(0), profile.depth(n - 1));
  Eigen::ArrayXd varying = profile.depth - floor;
  const double top = varying.abs().maxCoeff();
  const double edge = std::max(varying(0), varying(n - 1));
  if (top > 0.0 && edge > 1e-3 * top) {
    varying *= raised_cosine_taper<double>(n, kApodizationFraction);
    r.apodized = true;
    warn("absorption profile does not decay at the grid edges; raised-cosine apodization applied");
  }
  r.depth = varying + floor;
  const Eigen::ArrayXcd log_h = causal_completion<double>(-0.5 * varying);
  r.phase = -log_h.imag();
  return r;
}

Eigen::ArrayXcd transfer_function(const AbsorptionProfile& profile) {
  const PhaseResponse r = kk_phase(profile);
  Eigen::ArrayXcd h(r.depth.size());
  for (Eigen::Index k = 0; k < h.size(); ++k) h(k) = std::exp(std::complex<double>(-0.5 * r.depth(k), -r.phase(k)));
  return h;
}

Eigen::ArrayXcd impulse_response(const AbsorptionProfile& profile) { return to_time<double>(transfer_function(profile)); }

double precausal_energy_fraction(const AbsorptionProfile& profile) {
  const Eigen::ArrayXd e = impulse_response(profile).abs2();
  const Eigen::Index n = e.size();
  return e.tail(n / 2 - 1).sum() / e.sum();
}

PulseEnvelope propagate(const PulseEnvelope& pulse, const AbsorptionProfile& profile) {
  pulse.validate();
  profile.validate();
  const FrequencyGrid& grid = profile.grid;
  const Eigen::Index n = pulse.size();
  const double inner = 0.9 * grid.span();

  PulseEnvelope out = pulse;
  const bool conjugate_grid = static_cast<std::size_t>(n) == grid.size() &&
                              std::abs(pulse.dt * grid.spacing() * static_cast<double>(n) - 1.0) < 1e-9;

  if (conjugate_grid) {
    // Spectrum sampled directly on the profile detunings.
    const double nu0 = grid.first() - pulse.carrier_detuning;
    ArrayXc<double> a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = pulse.samples(i) * expi(kTwoPi * nu0 * pulse.time(i));
    ArrayXc<double> spec = to_frequency<double>(a);

    const Eigen::ArrayXd power = spec.abs2();
    double outside = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(grid.detuning(static_cast<std::size_t>(k))) > inner) outside += power(k);
    }
    if (outside > kClipTolerance * power.sum())
      throw PreconditionError("propagate: pulse spectrum is clipped by the profile grid");

    spec *= transfer_function(profile);
    const ArrayXc<double> b = to_time<double>(spec);
    for (Eigen::Index i = 0; i < n; ++i) out.samples(i) = b(i) * expi(-kTwoPi * nu0 * pulse.time(i));
    return out;
  }

  // General case: interpolate depth and phase onto the pulse's own frequencies.
  const PhaseResponse r = kk_phase(profile);
  ArrayXc<double> spec = to_frequency<double>(pulse.samples);
  const double df = 1.0 / (static_cast<double>(n) * pulse.dt);
  const Eigen::ArrayXd power = spec.abs2();
  double outside = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nu = static_cast<double>(j < n / 2 ? j : j - n) * df + pulse.carrier_detuning;
    if (std::abs(nu) > inner) outside += power(j);
    // interp_uniform returns 0 beyond the grid, i.e. H = 1 there.
    const double d = interp_uniform(r.depth, grid.first(), grid.spacing(), nu, 0.0);
    const double phi = interp_uniform(r.phase, grid.first(), grid.spacing(), nu, 0.0);
    spec(j) *= std::exp(std::complex<double>(-0.5 * d, -phi));
  }
  if (outside > kClipTolerance * power.sum())
    throw PreconditionError("propagate: pulse spectrum is clipped by the profile grid");
  out.samples = to_time<double>(spec);
  return out;
}

EchoReport echo_efficiency(const PulseEnvelope& out, const PulseEnvelope& in, double expected_echo_time,
                           std::optional<double> half_width) {
  const double t_in = peak_time(in);
  const double w = half_width.value_or(2.0 * intensity_fwhm(in));
  require(w > 0.0, "echo_efficiency: window half-width must be positive");
  const double trans_lo = t_in - w, trans_hi = t_in + w;
  EchoReport rep;
  rep.window_lo = expected_echo_time - w;
  rep.window_hi = expected_echo_time + w;
  if (rep.window_lo < trans_hi && trans_lo < rep.window_hi)
    throw PreconditionError("echo_efficiency: echo window overlaps the transmitted-pulse window");

  const double e_in = in.energy();
  require(e_in > 0.0, "echo_efficiency: input pulse has no energy");
  rep.echo_efficiency = out.energy_between(rep.window_lo, rep.window_hi) / e_in;
  rep.transmitted_fraction = out.energy_between(trans_lo, trans_hi) / e_in;

  double weight = 0.0, moment = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double t = out.time(i);
    if (t < rep.window_lo || t > rep.window_hi) continue;
    const double p = std::norm(out.samples(i));
    weight += p;
    moment += p * t;
  }
  rep.echo_time = weight > 0.0 ? moment / weight : expected_echo_time;
  return rep;
}

double analytic_efficiency(const CombParams& params) {
  params.validate();
  const double f = params.finesse;
  const double ratio = params.peak_depth / f;
  double d_eff = ratio, shape = 1.0;
  switch (params.tooth_shape) {
    case ToothShape::square: {
      const double x = std::numbers::pi / f;
      const double sinc = std::sin(x) / x;
      shape = sinc * sinc;
      break;
    }
    case ToothShape::gaussian:
      d_eff = ratio * std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));
      shape = std::exp(-7.0 / (f * f));
      break;
    case ToothShape::lorentzian:
      d_eff = ratio * 0.5 * std::numbers::pi;
      shape = std::exp(-2.0 * std::numbers::pi / f);
      break;
  }
  return d_eff * d_eff * std::exp(-d_eff) * shape * std::exp(-params.background_depth);
}

PulseEnvelope discrete_atom_oracle(const std::vector<Atom>& atoms, const PulseEnvelope& pulse) {
  pulse.validate();
  require(atoms.size() <= 10000, "discrete_atom_oracle: too many atoms for brute force");
  const double h = pulse.dt;
  const Eigen::Index n = pulse.size();
  Eigen::ArrayXcd response = Eigen::ArrayXcd::Zero(n);

  for (const Atom& atom : atoms) {
    if (atom.weight == 0.0) continue;
    const std::complex<double> s(0.0, -kTwoPi * (atom.detuning - pulse.carrier_detuning));
    const std::complex<double> sh = s * h;
    const std::complex<double> q = std::exp(sh);
    std::complex<double> i0, i1;  // int_0^h e^{s tau} dtau, int_0^h tau e^{s tau} dtau
    if (std::abs(sh) < 1e-4) {
      i0 = h * (1.0 + sh / 2.0 + sh * sh / 6.0);
      i1 = h * h * (0.5 + sh / 3.0 + sh * sh / 8.0);
    } else {
      i0 = (q - 1.0) / s;
      i1 = (q * (sh - 1.0) + 1.0) / (s * s);
    }
    const std::complex<double> w_now = i0 - i1 / h, w_prev = i1 / h;
    std::complex<double> y = 0.0, prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> cur = pulse.samples(i);
      y = q * y + cur * w_now + prev * w_prev;
      response(i) += atom.weight * y;
      prev = cur;
    }
  }
  PulseEnvelope out = pulse;
  out.samples -= response;
  return out;
}

std::vector<Atom> atoms_from_profile(const AbsorptionProfile& profile) {
  std::vector<Atom> atoms;
  atoms.reserve(profile.grid.size());
  for (std::size_t k = 0; k < profile.grid.size(); ++k) {
    const double d = profile.depth(static_cast<Eigen::Index>(k));
    if (d > 0.0) atoms.push_back({profile.grid.detuning(k), d * profile.grid.spacing()});
  }
  return atoms;
}

void write_trace(std::ostream& os, const PulseEnvelope& pulse, const std::string& title) {
  Table t;
  t.title = title;
  t.metadata = {{"dt_us", format_number(pulse.dt)},
                {"t0_us", format_number(pulse.t0)},
                {"n", std::to_string(pulse.size())},
                {"carrier_detuning_mhz", format_number(pulse.carrier_detuning)}};
  t.columns = {"t_us", "re", "im", "intensity"};
  t.data = {pulse.times(), pulse.samples.real(), pulse.samples.imag(), pulse.intensity()};
  write_table(os, t);
}

PulseEnvelope read_trace(std::istream& is) {
  const Table t = read_table(is);
  if (t.data.size() < 3) throw ConfigError("trace needs t, re and im columns");
  PulseEnvelope p;
  p.dt = std::stod(metadata_value(t, "dt_us"));
  p.t0 = std::stod(metadata_value(t, "t0_us"));
  p.carrier_detuning = std::stod(metadata_value(t, "carrier_detuning_mhz"));
  p.samples.resize(t.data[1].size());
  p.samples.real() = t.data[1];
  p.samples.imag() = t.data[2];
  p.validate();
  return p;
}

}  // namespace afc
