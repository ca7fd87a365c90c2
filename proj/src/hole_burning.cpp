#include <algorithm>
#include <cmath>

#include "afc/comb.hpp"
#include "afc/error.hpp"

namespace afc {

namespace {

bool addressed(const BurnStep& step, double nu) {
  const double rel = nu - step.center;
  if (std::abs(rel) > 0.5 * step.width) return false;
  if (step.pattern == BurnStep::Pattern::flat) return true;
  // Comb pattern: burn everywhere except inside the teeth.
  const int teeth = static_cast<int>(std::floor(step.width / step.comb_delta + 1e-9));
  const double tooth_half = 0.5 * step.comb_delta / step.comb_finesse;
  const double m = std::round(rel / step.comb_delta - 0.5 + 0.5 * teeth);
  if (m < 0 || m >= teeth) return true;
  const double c = (m + 0.5 - 0.5 * teeth) * step.comb_delta;
  return std::abs(rel - c) >= tooth_half;
}

}  // namespace

void BurnSequence::validate() const {
  require(cycles >= 1, "BurnSequence: cycles must be >= 1");
  for (const auto& s : steps) {
    HyperfineScheme::transition(s.transition);  // throws ConfigError on unknown labels
    require(std::isfinite(s.width) && s.width > 0.0, "BurnStep: width must be positive");
    require(std::isfinite(s.strength) && s.strength >= 0.0, "BurnStep: strength must be >= 0");
    require(s.repetitions >= 1, "BurnStep: repetitions must be >= 1");
    if (s.pattern == BurnStep::Pattern::comb) {
      require(s.comb_delta > 0.0 && s.comb_finesse > 1.0, "BurnStep: comb pattern needs delta > 0 and finesse > 1");
      require(s.width >= s.comb_delta, "BurnStep: comb pattern width must be >= delta");
    }
  }
}

HoleBurningResult simulate_hole_burning(const BurnSequence& sequence, const HyperfineScheme& scheme,
                                        const InhomogeneousLine& line, const FrequencyGrid& grid) {
  sequence.validate();
  line.validate();
  const auto f0 = HyperfineScheme::transition("f0");
  const double ref = scheme.transition_offset(f0);

  PopulationState state;
  for (int g = 0; g < 3; ++g) {
    for (int e = 0; e < 3; ++e) {
      const double bins = std::round((scheme.transition_offset(g, e) - ref) / grid.spacing());
      require(std::abs(bins) < 1e8, "simulate_hole_burning: hyperfine offsets too large for the grid");
      state.shifts(g, e) = static_cast<int>(bins);
    }
  }
  const int smax = state.shifts.maxCoeff();
  const int smin = state.shifts.minCoeff();
  require(static_cast<double>(smax - smin) * grid.spacing() < 2.0 * grid.span(),
          "simulate_hole_burning: hyperfine offsets must be small compared to the grid span");
  state.max_shift = smax;
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  state.populations = Eigen::ArrayX3d::Constant(n + smax - smin, 3, 1.0 / 3.0);

  const Eigen::Matrix3d& b = scheme.branching();
  for (int cycle = 0; cycle < sequence.cycles; ++cycle) {
    for (const BurnStep& step : sequence.steps) {
      const auto t = HyperfineScheme::transition(step.transition);
      const double keep = std::exp(-step.strength * b(t.ground, t.excited));
      // Share of the removed population handed to each other ground level.
      Eigen::Array3d share = Eigen::Array3d::Zero();
      double total = 0.0;
      for (int g = 0; g < 3; ++g) {
        if (g == t.ground) continue;
        share(g) = b(g, t.excited);
        total += share(g);
      }
      for (int g = 0; g < 3; ++g) {
        if (g != t.ground) share(g) = total > 0.0 ? share(g) / total : 0.5;
      }

      for (Eigen::Index c = 0; c < state.classes(); ++c) {
        const Eigen::Index k = state.grid_index(c, t.ground, t.excited);
        if (k < 0 || k >= n || !addressed(step, grid.detuning(static_cast<std::size_t>(k)))) continue;
        auto pop = state.populations.row(c);
        for (int rep = 0; rep < step.repetitions; ++rep) {
          const double removed = pop(t.ground) * (1.0 - keep);
          pop(t.ground) -= removed;
          for (int g = 0; g < 3; ++g) {
            if (g != t.ground) pop(g) += removed * share(g);
          }
        }
      }
    }
  }

  AbsorptionProfile profile = absorption_from_populations(state, scheme, line, grid);
  return {std::move(state), std::move(profile)};
}

double mean_level_population(const PopulationState& state, int level, HyperfineScheme::Transition via,
                             const FrequencyGrid& grid, double lo, double hi) {
  double sum = 0.0;
  int count = 0;
  const auto n = static_cast<Eigen::Index>(grid.size());
  for (Eigen::Index c = 0; c < state.classes(); ++c) {
    const Eigen::Index k = state.grid_index(c, via.ground, via.excited);
    if (k < 0 || k >= n) continue;
    const double nu = grid.detuning(static_cast<std::size_t>(k));
    if (nu < lo || nu > hi) continue;
    sum += state.populations(c, level);
    ++count;
  }
  require(count > 0, "mean_level_population: no classes in window");
  return sum / count;
}

AbsorptionProfile absorption_from_populations(const PopulationState& state, const HyperfineScheme& scheme,
                                              const InhomogeneousLine& line, const FrequencyGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::ArrayXd weight = Eigen::ArrayXd::Zero(n);
  const Eigen::Matrix3d& b = scheme.branching();
  for (int g = 0; g < 3; ++g) {
    for (int e = 0; e < 3; ++e) {
      if (b(g, e) == 0.0) continue;
      // Grid index k is reached by class k + max_shift - shift(g, e).
      const Eigen::Index offset = state.max_shift - state.shifts(g, e);
      for (Eigen::Index k = 0; k < n; ++k) weight(k) += b(g, e) * state.populations(k + offset, g);
    }
  }
  Eigen::ArrayXd d(n);
  for (Eigen::Index k = 0; k < n; ++k) d(k) = line.depth_at(grid.detuning(static_cast<std::size_t>(k))) * weight(k);
  return {grid, std::move(d)};
}

}  // namespace afc
