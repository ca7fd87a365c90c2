#include "afc/comb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afc/error.hpp"
#include "afc/numeric.hpp"

namespace afc {

std::string_view to_string(ToothShape shape) {
  switch (shape) {
    case ToothShape::square:
      return "square";
    case ToothShape::gaussian:
      return "gaussian";
    case ToothShape::lorentzian:
      return "lorentzian";
  }
  return "square";
}

ToothShape tooth_shape_from_string(std::string_view name) {
  if (name == "square") return ToothShape::square;
  if (name == "gaussian") return ToothShape::gaussian;
  if (name == "lorentzian") return ToothShape::lorentzian;
  throw ConfigError("unknown tooth shape '" + std::string(name) + "'");
}

void CombParams::validate() const {
  require(std::isfinite(delta) && delta > 0.0, "CombParams: delta must be positive");
  require(std::isfinite(finesse) && finesse > 1.0, "CombParams: finesse must exceed 1");
  require(std::isfinite(bandwidth) && bandwidth >= delta, "CombParams: bandwidth must be >= delta");
  require(std::isfinite(peak_depth) && peak_depth >= 0.0, "CombParams: peak_depth must be >= 0");
  require(std::isfinite(background_depth) && background_depth >= 0.0, "CombParams: background_depth must be >= 0");
}

int CombParams::tooth_count() const { return static_cast<int>(std::floor(bandwidth / delta + 1e-9)); }

AbsorptionProfile parametric_comb(const CombParams& params, const FrequencyGrid& grid) {
  params.validate();
  const double width = params.tooth_fwhm();
  const double h = grid.spacing();
  require(h <= width / 4.0 * (1.0 + 1e-12), "parametric_comb: grid spacing must be <= tooth_fwhm/4");
  require(0.5 * params.bandwidth <= grid.span(), "parametric_comb: comb bandwidth exceeds the grid");

  const int teeth = params.tooth_count();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::ArrayXd d = Eigen::ArrayXd::Constant(n, params.background_depth);
  const double d_peak = params.peak_depth;

  for (int m = 0; m < teeth; ++m) {
    const double c = (m + 0.5 - 0.5 * teeth) * params.delta;
    switch (params.tooth_shape) {
      case ToothShape::square: {
        const double lo = c - 0.5 * width, hi = c + 0.5 * width;
        const auto k0 = static_cast<Eigen::Index>(std::max(0.0, std::floor((lo - grid.first()) / h - 1.0)));
        const auto k1 = std::min(n - 1, static_cast<Eigen::Index>(std::ceil((hi - grid.first()) / h + 1.0)));
        for (Eigen::Index k = k0; k <= k1; ++k) {
          const double nu = grid.detuning(static_cast<std::size_t>(k));
          const double overlap = std::min(hi, nu + 0.5 * h) - std::max(lo, nu - 0.5 * h);
          if (overlap > 0.0) d(k) += d_peak * overlap / h;
        }
        break;
      }
      case ToothShape::gaussian:
        for (Eigen::Index k = 0; k < n; ++k) {
          const double x = (grid.detuning(static_cast<std::size_t>(k)) - c) / width;
          d(k) += d_peak * std::exp(-4.0 * std::numbers::ln2 * x * x);
        }
        break;
      case ToothShape::lorentzian:
        for (Eigen::Index k = 0; k < n; ++k) {
          const double x = (grid.detuning(static_cast<std::size_t>(k)) - c) / width;
          d(k) += d_peak / (1.0 + 4.0 * x * x);
        }
        break;
    }
  }
  return {grid, std::move(d), params.background_depth};
}

CombMeasurement measure_comb(const AbsorptionProfile& profile, double center, double bandwidth) {
  const FrequencyGrid& g = profile.grid;
  const double lo = center - 0.5 * bandwidth, hi = center + 0.5 * bandwidth;
  const auto first = static_cast<Eigen::Index>(std::ceil((lo - g.first()) / g.spacing() - 1e-9));
  const auto last = static_cast<Eigen::Index>(std::floor((hi - g.first()) / g.spacing() + 1e-9));
  require(first >= 0 && last < profile.depth.size() && last - first >= 8,
          "measure_comb: band must lie inside the grid and span at least 8 samples");
  const Eigen::ArrayXd band = profile.depth.segment(first, last - first + 1);
  const Eigen::Index len = band.size();

  // Period from the strongest non-DC Fourier component, zero padded 16x.
  Eigen::Index padded = 1;
  while (padded < 16 * len) padded <<= 1;
  ArrayXc<double> buf = ArrayXc<double>::Zero(padded);
  buf.head(len) = (band - band.mean()).cast<std::complex<double>>();
  const Eigen::ArrayXd mag = to_frequency<double>(buf).abs();
  const double df = 1.0 / (static_cast<double>(padded) * g.spacing());  // cycles per MHz
  const auto min_bin = static_cast<Eigen::Index>(std::ceil(1.5 / (static_cast<double>(len) * g.spacing()) / df));
  Eigen::Index best = min_bin;
  for (Eigen::Index i = min_bin; i < padded / 2; ++i) {
    if (mag(i) > mag(best)) best = i;
  }
  if (!(mag(best) > 0.0)) throw ComputationError("measure_comb: no periodic structure in band");
  double bin = static_cast<double>(best);
  if (best > 0 && best + 1 < padded) {
    const double ym = mag(best - 1), y0 = mag(best), yp = mag(best + 1);
    const double curv = ym - 2.0 * y0 + yp;
    if (curv < 0.0) bin += 0.5 * (ym - yp) / curv;
  }

  CombMeasurement out{};
  out.period = 1.0 / (bin * df);

  const double floor = band.minCoeff();
  const double top = band.maxCoeff();
  const double half = floor + 0.5 * (top - floor);
  double width_sum = 0.0, peak_sum = 0.0;
  int runs = 0;
  for (Eigen::Index i = 1; i + 1 < len;) {
    if (band(i) < half || band(i - 1) >= half) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    double run_max = band(i);
    while (j + 1 < len && band(j + 1) >= half) run_max = std::max(run_max, band(++j));
    if (j + 1 >= len) break;  // run touches the band edge
    const double left = (static_cast<double>(i - 1) + (half - band(i - 1)) / (band(i) - band(i - 1))) * g.spacing();
    const double right = (static_cast<double>(j) + (band(j) - half) / (band(j) - band(j + 1))) * g.spacing();
    width_sum += right - left;
    peak_sum += run_max;
    ++runs;
    i = j + 1;
  }
  if (runs == 0) throw ComputationError("measure_comb: no teeth found in band");
  out.teeth = runs;
  out.tooth_fwhm = width_sum / runs;
  out.peak_depth = peak_sum / runs - floor;
  out.background = floor;
  return out;
}

}  // namespace afc
