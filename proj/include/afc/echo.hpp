#pragma once

// Linear propagation of a weak pulse through an absorption profile, AFC echo
// bookkeeping and a discrete-atom time-domain cross-check.
//
// Sign convention: a spectral component at detuning nu evolves as
// exp(-2 pi i nu t). The medium transfer function is
//   H(nu) = exp(-d(nu)/2 - i phi(nu)),
// with phi the discrete Hilbert partner of d/2 chosen so that the impulse
// response of H vanishes before t = 0.

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "afc/comb.hpp"
#include "afc/spectral.hpp"

namespace afc {

struct PulseEnvelope {
  double dt = 0.0;                // microseconds
  double t0 = 0.0;                // time of sample 0
  Eigen::ArrayXcd samples;        // complex baseband field
  double carrier_detuning = 0.0;  // MHz, carrier offset from the grid center

  void validate() const;
  Eigen::Index size() const { return samples.size(); }
  double time(Eigen::Index i) const { return t0 + static_cast<double>(i) * dt; }
  Eigen::ArrayXd times() const;
  Eigen::ArrayXd intensity() const { return samples.abs2(); }
  /// sum |a|^2 dt
  double energy() const;
  /// Energy inside [lo, hi].
  double energy_between(double lo, double hi) const;
};

/// Gaussian pulse whose intensity FWHM is `fwhm` (us), peaking at `peak_time`
/// with unit peak field amplitude.
PulseEnvelope gaussian_pulse(double fwhm, double peak_time, double dt, Eigen::Index n, double t0,
                             double carrier_detuning = 0.0);

/// Pulse sampled on the time grid conjugate to `grid`: n = grid.size() and
/// dt = 1 / (n * spacing), which lets propagate() skip interpolation.
PulseEnvelope gaussian_pulse_for(const FrequencyGrid& grid, double fwhm, double peak_time, double t0);

/// Intensity-weighted peak time (parabolic refinement of the maximum sample).
double peak_time(const PulseEnvelope& pulse);
/// Intensity FWHM from linearly interpolated half-maximum crossings.
double intensity_fwhm(const PulseEnvelope& pulse);

struct PhaseResponse {
  Eigen::ArrayXd phase;  // radians, one per grid point
  Eigen::ArrayXd depth;  // depth actually used (apodized if needed)
  bool apodized = false;
};

/// Dispersive phase of the profile. Profiles that do not decay toward the grid
/// edges are apodized with a raised cosine over the outer 5% and a warning is
/// emitted.
PhaseResponse kk_phase(const AbsorptionProfile& profile);

/// H(nu_k) on the profile grid.
Eigen::ArrayXcd transfer_function(const AbsorptionProfile& profile);

/// Impulse response h(t_n) on the conjugate time grid, t_n = n/(N*spacing);
/// indices above N/2 are negative times.
Eigen::ArrayXcd impulse_response(const AbsorptionProfile& profile);

/// Fraction of impulse-response energy at negative times.
double precausal_energy_fraction(const AbsorptionProfile& profile);

/// Output field = inverse transform of (input spectrum x H). Refuses a pulse
/// whose spectrum is not contained inside the profile grid.
PulseEnvelope propagate(const PulseEnvelope& pulse, const AbsorptionProfile& profile);

struct EchoReport {
  double echo_time = 0.0;  // intensity-weighted centroid inside the window (us)
  double echo_efficiency = 0.0;
  double transmitted_fraction = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Windowed echo efficiency. The window is expected_echo_time +- half_width,
/// with half_width defaulting to twice the input intensity FWHM; it must not
/// overlap the transmitted-pulse window around the input peak.
EchoReport echo_efficiency(const PulseEnvelope& out, const PulseEnvelope& in, double expected_echo_time,
                           std::optional<double> half_width = std::nullopt);

/// Closed-form forward AFC efficiency
///   eta = d_eff^2 exp(-d_eff) * eta_shape(F) * exp(-d0)
/// with d_eff the period-averaged tooth depth: d/F (square), d/F*sqrt(pi/(4 ln 2))
/// (gaussian), d/F*pi/2 (lorentzian); eta_shape = sinc^2(pi/F), exp(-7/F^2),
/// exp(-2 pi/F) respectively.
double analytic_efficiency(const CombParams& params);

struct Atom {
  double detuning;  // MHz
  double weight;    // coupling rate (1/us)
};

/// First-order response of discrete atoms:
///   out(t) = in(t) - sum_j w_j int_0^inf in(t - tau) exp(-2 pi i delta_j tau) dtau,
/// integrated exactly for a piecewise-linear input. Input is taken as zero
/// before the first sample. Brute force, O(atoms x samples).
PulseEnvelope discrete_atom_oracle(const std::vector<Atom>& atoms, const PulseEnvelope& pulse);

/// Atoms equivalent to a profile in the thin limit: one per grid point with
/// weight d_k * spacing.
std::vector<Atom> atoms_from_profile(const AbsorptionProfile& profile);

// Four columns: t_us, re, im, intensity.
void write_trace(std::ostream& os, const PulseEnvelope& pulse, const std::string& title = "time trace");
PulseEnvelope read_trace(std::istream& is);

}  // namespace afc
