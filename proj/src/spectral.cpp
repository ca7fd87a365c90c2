#include "afc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "afc/error.hpp"
#include "afc/numeric.hpp"
#include "afc/table_io.hpp"

namespace afc {

FrequencyGrid::FrequencyGrid(double span_mhz, std::size_t n_points, double center_abs_thz)
    : span_(span_mhz), n_(n_points), spacing_(0.0), center_abs_thz_(center_abs_thz) {
  require(n_points >= 2 && is_power_of_two(n_points), "FrequencyGrid: n_points must be a power of two >= 2");
  require(std::isfinite(span_mhz) && span_mhz > 0.0, "FrequencyGrid: span must be positive");
  spacing_ = 2.0 * span_ / static_cast<double>(n_ - 1);
}

FrequencyGrid FrequencyGrid::with_spacing(double spacing_mhz, std::size_t n_points, double center_abs_thz) {
  require(spacing_mhz > 0.0, "FrequencyGrid: spacing must be positive");
  FrequencyGrid g(0.5 * spacing_mhz * static_cast<double>(n_points - 1), n_points, center_abs_thz);
  g.spacing_ = spacing_mhz;
  return g;
}

Eigen::ArrayXd FrequencyGrid::detunings() const {
  Eigen::ArrayXd d(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < n_; ++k) d(static_cast<Eigen::Index>(k)) = detuning(k);
  return d;
}

std::string_view to_string(LineShape shape) { return shape == LineShape::gaussian ? "gaussian" : "lorentzian"; }

LineShape line_shape_from_string(std::string_view name) {
  if (name == "gaussian") return LineShape::gaussian;
  if (name == "lorentzian") return LineShape::lorentzian;
  throw ConfigError("unknown line shape '" + std::string(name) + "'");
}

void InhomogeneousLine::validate() const {
  require(std::isfinite(fwhm) && fwhm > 0.0, "InhomogeneousLine: fwhm must be positive");
  require(std::isfinite(peak_depth) && peak_depth >= 0.0, "InhomogeneousLine: peak_depth must be >= 0");
  require(std::isfinite(center_offset), "InhomogeneousLine: center_offset must be finite");
}

double InhomogeneousLine::depth_at(double detuning) const {
  const double x = (detuning - center_offset) / fwhm;
  if (shape == LineShape::gaussian) return peak_depth * std::exp(-4.0 * std::numbers::ln2 * x * x);
  return peak_depth / (1.0 + 4.0 * x * x);
}

HyperfineScheme::HyperfineScheme(std::array<double, 3> ground_offsets, std::array<double, 3> excited_offsets,
                                 Eigen::Matrix3d branching)
    : ground_(ground_offsets), excited_(excited_offsets), branching_(std::move(branching)) {
  for (int i = 0; i < 2; ++i) {
    require(ground_[i] < ground_[i + 1], "HyperfineScheme: ground offsets must be strictly increasing");
    require(excited_[i] < excited_[i + 1], "HyperfineScheme: excited offsets must be strictly increasing");
  }
  for (int g = 0; g < 3; ++g) {
    for (int e = 0; e < 3; ++e) {
      const double b = branching_(g, e);
      require(std::isfinite(b) && b >= 0.0 && b <= 1.0, "HyperfineScheme: branching entries must lie in [0,1]");
    }
    require(std::abs(branching_.row(g).sum() - 1.0) <= 1e-12, "HyperfineScheme: branching rows must sum to 1");
  }
}

HyperfineScheme::Transition HyperfineScheme::transition(std::string_view label) {
  if (label == "f0") return {0, 2};
  if (label == "f1") return {1, 2};
  if (label == "f2") return {2, 1};
  throw ConfigError("unknown transition label '" + std::string(label) + "'");
}

AbsorptionProfile::AbsorptionProfile(FrequencyGrid g, Eigen::ArrayXd d, double background)
    : grid(std::move(g)), depth(std::move(d)), background_depth(background) {
  validate();
}

void AbsorptionProfile::validate() const {
  require(depth.size() == static_cast<Eigen::Index>(grid.size()), "AbsorptionProfile: depth length != grid size");
  require(depth.allFinite() && (depth >= 0.0).all(), "AbsorptionProfile: depth must be finite and >= 0");
  require(std::isfinite(background_depth) && background_depth >= 0.0,
          "AbsorptionProfile: background depth must be >= 0");
}

AbsorptionProfile AbsorptionProfile::transparent(const FrequencyGrid& g) {
  return {g, Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(g.size()))};
}

AbsorptionProfile build_line_profile(const InhomogeneousLine& line, const FrequencyGrid& grid) {
  line.validate();
  // A truncated line corrupts the dispersive (Kramers-Kronig) partner.
  require(grid.span() >= 2.0 * line.fwhm, "build_line_profile: grid span must be at least 2*fwhm");
  require(std::abs(line.center_offset) < grid.span(), "build_line_profile: line center outside the grid");
  Eigen::ArrayXd d = grid.detunings().unaryExpr([&](double nu) { return line.depth_at(nu); });
  return {grid, std::move(d)};
}

LineMeasurement measure_line(const AbsorptionProfile& profile) {
  const Eigen::ArrayXd& d = profile.depth;
  const FrequencyGrid& g = profile.grid;
  Eigen::Index k{};
  const double peak = d.maxCoeff(&k);
  const double floor = profile.background_depth;
  const double contrast = peak - floor;
  if (!(contrast > 1e-12 * std::max(1.0, peak)) || d.minCoeff() == peak)
    throw ComputationError("measure_line: profile has no line above the background");

  double offset = g.detuning(static_cast<std::size_t>(k));
  double top = peak;
  if (k > 0 && k + 1 < d.size()) {
    const double ym = d(k - 1), y0 = d(k), yp = d(k + 1);
    const double curvature = ym - 2.0 * y0 + yp;
    if (curvature < 0.0) {
      const double shift = 0.5 * (ym - yp) / curvature;
      offset += shift * g.spacing();
      top = y0 - 0.25 * (ym - yp) * shift;
    }
  }

  const double half = floor + 0.5 * (top - floor);
  Eigen::Index lo = k;
  while (lo > 0 && d(lo) >= half) --lo;
  Eigen::Index hi = k;
  while (hi + 1 < d.size() && d(hi) >= half) ++hi;
  if (d(lo) >= half || d(hi) >= half) throw ComputationError("measure_line: half-maximum crossing outside the grid");

  const auto crossing = [&](Eigen::Index below, Eigen::Index above) {
    const double frac = (half - d(below)) / (d(above) - d(below));
    return g.detuning(static_cast<std::size_t>(below)) +
           frac * (g.detuning(static_cast<std::size_t>(above)) - g.detuning(static_cast<std::size_t>(below)));
  };
  const double left = crossing(lo, lo + 1);
  const double right = crossing(hi, hi - 1);
  return {offset, right - left, top};
}

void write_profile(std::ostream& os, const AbsorptionProfile& profile) {
  const auto& g = profile.grid;
  Table t;
  t.title = "absorption profile";
  t.metadata = {{"center_abs_thz", format_number(g.center_abs_thz())},
                {"span_mhz", format_number(g.span())},
                {"n_points", std::to_string(g.size())},
                {"spacing_mhz", format_number(g.spacing())},
                {"background_depth", format_number(profile.background_depth)}};
  t.columns = {"detuning_MHz", "optical_depth"};
  t.data = {g.detunings(), profile.depth};
  write_table(os, t);
}

AbsorptionProfile read_profile(std::istream& is) {
  const Table t = read_table(is);
  const auto number = [&](const std::string& key) {
    try {
      return std::stod(metadata_value(t, key));
    } catch (const std::logic_error&) {
      throw ConfigError("profile header: malformed value for '" + key + "'");
    }
  };
  const auto n = static_cast<std::size_t>(number("n_points"));
  const FrequencyGrid grid = FrequencyGrid::with_spacing(number("spacing_mhz"), n, number("center_abs_thz"));
  if (t.data.size() != 2 || t.data[1].size() != static_cast<Eigen::Index>(n))
    throw ConfigError("profile body does not match its header");
  return {grid, t.data[1], number("background_depth")};
}

}  // namespace afc
