#pragma once

// Atomic-frequency-comb absorption profiles: a direct parametric construction
// and a rate-equation simulation of the spectral hole-burning preparation.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afc/spectral.hpp"

namespace afc {

enum class ToothShape { square, gaussian, lorentzian };

std::string_view to_string(ToothShape shape);
ToothShape tooth_shape_from_string(std::string_view name);

struct CombParams {
  double delta = 0.0;       // comb period (MHz)
  double finesse = 0.0;     // period / tooth FWHM
  double bandwidth = 0.0;   // total comb width (MHz), centered on zero detuning
  ToothShape tooth_shape = ToothShape::square;
  double peak_depth = 0.0;        // tooth depth above the background
  double background_depth = 0.0;  // uniform residual absorption

  void validate() const;
  double tooth_fwhm() const { return delta / finesse; }
  /// Number of teeth, one per period cell inside the bandwidth.
  int tooth_count() const;
  /// Storage time 1/delta (microseconds).
  double storage_time() const { return 1.0 / delta; }
};

/// Teeth centered at (m + 1/2)*delta - bandwidth/2, m = 0..tooth_count-1, plus
/// the uniform background over the whole grid. Square teeth are area-sampled
/// on the grid cells so the mean depth is exact at any resolution.
AbsorptionProfile parametric_comb(const CombParams& params, const FrequencyGrid& grid);

struct CombMeasurement {
  double period;      // MHz
  double tooth_fwhm;  // MHz, mean over teeth
  double peak_depth;  // mean tooth maximum above the floor
  double background;  // floor inside the band
  int teeth;
};

/// Measures comb statistics inside [center - bandwidth/2, center + bandwidth/2].
/// The period comes from the dominant non-zero Fourier component of the
/// in-band depth, refined by parabolic interpolation.
CombMeasurement measure_comb(const AbsorptionProfile& profile, double center, double bandwidth);

// ---------------------------------------------------------------------------
// Spectral hole burning

struct BurnStep {
  enum class Pattern { flat, comb };

  std::string transition;  // "f0", "f1" or "f2"
  double center = 0.0;     // detuning of the burn window center (MHz)
  double width = 0.0;      // window width (MHz)
  Pattern pattern = Pattern::flat;
  double comb_delta = 0.0;    // only for Pattern::comb
  double comb_finesse = 0.0;  // only for Pattern::comb
  double strength = 0.0;      // saturation parameter per repetition
  int repetitions = 1;
};

struct BurnSequence {
  std::vector<BurnStep> steps;
  int cycles = 1;  // the whole step list is repeated this many times

  void validate() const;
};

/// Ground-level populations per spectral class. Class c has its (g, e)
/// transition on grid index c - max_shift + shift(g, e).
struct PopulationState {
  Eigen::ArrayX3d populations;  // rows: classes, columns: ground levels
  Eigen::Matrix3i shifts;       // transition offsets in grid bins
  int max_shift = 0;

  Eigen::Index classes() const { return populations.rows(); }
  /// Grid index at which class c's (g, e) transition lands (may be off-grid).
  Eigen::Index grid_index(Eigen::Index c, int g, int e) const { return c - max_shift + shifts(g, e); }
};

struct HoleBurningResult {
  PopulationState state;
  AbsorptionProfile profile;
};

/// Rate-equation burning with the excited state adiabatically eliminated.
/// Each repetition of a step multiplies the targeted ground population of
/// every addressed class by exp(-strength * branching(g, e)) and hands the
/// removed population to the other two ground levels in proportion to their
/// branching into the same excited level.
HoleBurningResult simulate_hole_burning(const BurnSequence& sequence, const HyperfineScheme& scheme,
                                        const InhomogeneousLine& line, const FrequencyGrid& grid);

/// Mean population of ground `level` over the classes whose `via` transition
/// lands inside [lo, hi] on the grid.
double mean_level_population(const PopulationState& state, int level, HyperfineScheme::Transition via,
                             const FrequencyGrid& grid, double lo, double hi);

/// Absorption of a population state: at each detuning the line envelope times
/// the branching-weighted population of every (class, transition) landing there.
AbsorptionProfile absorption_from_populations(const PopulationState& state, const HyperfineScheme& scheme,
                                              const InhomogeneousLine& line, const FrequencyGrid& grid);

}  // namespace afc
