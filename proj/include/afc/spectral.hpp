#pragma once

// Frequency grids, inhomogeneous absorption lines and the hyperfine level
// bookkeeping. Units: frequencies in MHz, times in microseconds.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace afc {

/// Uniform detuning axis symmetric about zero, detuning(k) = -span + k*spacing.
class FrequencyGrid {
 public:
  FrequencyGrid(double span_mhz, std::size_t n_points, double center_abs_thz = 0.0);

  double span() const { return span_; }
  std::size_t size() const { return n_; }
  double spacing() const { return spacing_; }
  double center_abs_thz() const { return center_abs_thz_; }
  double first() const { return -span_; }
  double detuning(std::size_t k) const { return -span_ + static_cast<double>(k) * spacing_; }
  Eigen::ArrayXd detunings() const;

  /// Grid whose spacing is exactly `spacing_mhz`.
  static FrequencyGrid with_spacing(double spacing_mhz, std::size_t n_points, double center_abs_thz = 0.0);

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double span_;
  std::size_t n_;
  double spacing_;
  double center_abs_thz_;
};

enum class LineShape { gaussian, lorentzian };

std::string_view to_string(LineShape shape);
LineShape line_shape_from_string(std::string_view name);

struct InhomogeneousLine {
  LineShape shape = LineShape::gaussian;
  double fwhm = 0.0;           // MHz
  double center_offset = 0.0;  // MHz from grid center
  double peak_depth = 0.0;     // optical depth alpha*L at the peak

  void validate() const;
  /// Optical depth at `detuning`, no grid involved.
  double depth_at(double detuning) const;
};

/// Ground/excited hyperfine levels, indexed 0..2 as |+-1/2>, |+-3/2>, |+-5/2>.
class HyperfineScheme {
 public:
  struct Transition {
    int ground;
    int excited;
  };

  HyperfineScheme(std::array<double, 3> ground_offsets, std::array<double, 3> excited_offsets,
                  Eigen::Matrix3d branching);

  const std::array<double, 3>& ground_offsets() const { return ground_; }
  const std::array<double, 3>& excited_offsets() const { return excited_; }
  const Eigen::Matrix3d& branching() const { return branching_; }

  /// Transition frequency offset excited - ground (MHz).
  double transition_offset(int ground, int excited) const { return excited_[excited] - ground_[ground]; }
  double transition_offset(Transition t) const { return transition_offset(t.ground, t.excited); }

  /// f0 = |1/2>g -> |5/2>e, f1 = |3/2>g -> |5/2>e, f2 = |5/2>g -> |3/2>e.
  static Transition transition(std::string_view label);

 private:
  std::array<double, 3> ground_;
  std::array<double, 3> excited_;
  Eigen::Matrix3d branching_;
};

/// Optical depth d(omega) on a grid. `depth` is the total depth, already
/// including the uniform residual `background_depth`.
struct AbsorptionProfile {
  FrequencyGrid grid;
  Eigen::ArrayXd depth;
  double background_depth = 0.0;

  AbsorptionProfile(FrequencyGrid g, Eigen::ArrayXd d, double background = 0.0);

  void validate() const;
  /// Transparent medium on `g`.
  static AbsorptionProfile transparent(const FrequencyGrid& g);
};

AbsorptionProfile build_line_profile(const InhomogeneousLine& line, const FrequencyGrid& grid);

struct LineMeasurement {
  double peak_offset;  // MHz
  double fwhm;         // MHz
  double peak_depth;
};

/// Peak by three-point quadratic interpolation, FWHM from linearly
/// interpolated half-maximum crossings above the background level.
LineMeasurement measure_line(const AbsorptionProfile& profile);

// Two-column text form: comment header with grid metadata, then
// "detuning_MHz<TAB>optical_depth" rows.
void write_profile(std::ostream& os, const AbsorptionProfile& profile);
AbsorptionProfile read_profile(std::istream& is);

}  // namespace afc
