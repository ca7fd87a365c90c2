#include "afc/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "afc/error.hpp"

namespace afc {

void NoiseModel::validate() const {
  require(std::isfinite(sigma) && sigma >= 0.0, "NoiseModel: sigma must be >= 0");
}

Eigen::ArrayXd NoiseModel::apply(const Eigen::ArrayXd& values) const {
  validate();
  if (sigma == 0.0) return values;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::ArrayXd out = values;
  const double scale = values.size() ? values.abs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double eps = normal(rng);
    if (kind == Kind::multiplicative_gaussian) {
      out(i) *= 1.0 + sigma * eps;
    } else {
      out(i) += sigma * scale * eps;
    }
  }
  return out;
}

NoiseModel NoiseModel::with_seed(std::uint64_t s) const {
  NoiseModel n = *this;
  n.seed = s;
  return n;
}

std::string_view to_string(NoiseModel::Kind kind) {
  return kind == NoiseModel::Kind::additive_gaussian ? "additive_gaussian" : "multiplicative_gaussian";
}

NoiseModel::Kind noise_kind_from_string(std::string_view name) {
  if (name == "additive_gaussian") return NoiseModel::Kind::additive_gaussian;
  if (name == "multiplicative_gaussian") return NoiseModel::Kind::multiplicative_gaussian;
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

DecayFit fit_log_linear(const Series& points, DecayKind kind) {
  const Eigen::Index n = points.size();
  require(points.y.size() == n, "fit_log_linear: x and y lengths differ");
  require(n >= 3, "fit_log_linear: need at least 3 points");
  require((points.y > 0.0).all(), "fit_log_linear: amplitudes must be positive (log undefined)");

  const Eigen::ArrayXd& x = points.x;
  const Eigen::ArrayXd ly = points.y.log();
  const double xm = x.mean(), ym = ly.mean();
  const Eigen::ArrayXd dx = x - xm;
  const double sxx = dx.square().sum();
  require(sxx > 0.0, "fit_log_linear: x values must not all coincide");
  const double slope = (dx * (ly - ym)).sum() / sxx;
  const double intercept = ym - slope * xm;
  const double rss = (ly - intercept - slope * x).square().sum();
  const double s2 = rss / static_cast<double>(n - 2);

  DecayFit f;
  f.kind = kind;
  f.rate = -slope;
  f.intercept = intercept;
  f.stderr_rate = std::sqrt(s2 / sxx);
  f.stderr_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xm * xm / sxx));

  const double pi = std::numbers::pi;
  switch (kind) {
    case DecayKind::two_pulse_echo:
    case DecayKind::generic: {
      const double scale = kind == DecayKind::two_pulse_echo ? 2.0 : 1.0;
      f.unbounded = !(f.rate > 0.0);
      if (f.unbounded) {
        f.derived_constant = std::numeric_limits<double>::infinity();
        f.derived_stderr = std::numeric_limits<double>::infinity();
      } else {
        f.derived_constant = scale / f.rate;
        f.derived_stderr = scale * f.stderr_rate / (f.rate * f.rate);
      }
      break;
    }
    case DecayKind::spin_wave_field:
      f.derived_constant = f.rate / pi;
      f.derived_stderr = f.stderr_rate / pi;
      break;
    case DecayKind::spin_wave_intensity:
      f.derived_constant = f.rate / (2.0 * pi);
      f.derived_stderr = f.stderr_rate / (2.0 * pi);
      break;
  }
  return f;
}

Series simulate_two_pulse_echo(double t2, const std::vector<double>& spacings, const NoiseModel& noise, double a0) {
  require(std::isfinite(t2) && t2 > 0.0, "simulate_two_pulse_echo: T2 must be positive");
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    require(spacings[i] > 0.0, "simulate_two_pulse_echo: spacings must be positive");
    if (i) require(spacings[i] > spacings[i - 1], "simulate_two_pulse_echo: spacings must increase");
  }
  Series s;
  s.x = Eigen::Map<const Eigen::ArrayXd>(spacings.data(), static_cast<Eigen::Index>(spacings.size()));
  s.y = noise.apply(a0 * (-2.0 * s.x / t2).exp());
  return s;
}

Series apply_noise(const Series& clean, const NoiseModel& noise) { return {clean.x, noise.apply(clean.y)}; }

Series simulate_interference(double i_echo, double i_ref, double overlap, double phi0,
                             const std::vector<double>& phases, const NoiseModel& noise) {
  require(i_echo >= 0.0 && i_ref >= 0.0, "simulate_interference: intensities must be >= 0");
  require(overlap >= 0.0 && overlap <= 1.0, "simulate_interference: overlap must lie in [0,1]");
  Series s;
  s.x = Eigen::Map<const Eigen::ArrayXd>(phases.data(), static_cast<Eigen::Index>(phases.size()));
  const double cross = 2.0 * overlap * std::sqrt(i_echo * i_ref);
  s.y = noise.apply(i_echo + i_ref + cross * (s.x + phi0).sin());
  return s;
}

std::vector<double> phase_scan(double step_degrees) {
  require(step_degrees > 0.0, "phase_scan: step must be positive");
  std::vector<double> out;
  for (int i = 0; i * step_degrees < 360.0 - 1e-9; ++i) out.push_back(i * step_degrees * std::numbers::pi / 180.0);
  return out;
}

FringeFit fit_fringe(const Series& points) {
  const Eigen::Index n = points.size();
  require(points.y.size() == n, "fit_fringe: phase and intensity lengths differ");
  require(n >= 4, "fit_fringe: need at least 4 points");

  // The phases must not fit inside any half period: largest circular gap < pi.
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> wrapped(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::fmod(points.x(i), two_pi);
    wrapped[static_cast<std::size_t>(i)] = p < 0.0 ? p + two_pi : p;
  }
  std::sort(wrapped.begin(), wrapped.end());
  double gap = wrapped.front() + two_pi - wrapped.back();
  for (std::size_t i = 1; i < wrapped.size(); ++i) gap = std::max(gap, wrapped[i] - wrapped[i - 1]);
  require(gap < std::numbers::pi - 1e-12, "fit_fringe: phases must span more than half a period");

  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = points.x.sin().matrix();
  design.col(2) = points.x.cos().matrix();
  const auto sol = solve_least_squares(design, points.y.matrix());
  const double a = sol.coeffs(0), b = sol.coeffs(1), c = sol.coeffs(2);
  if (!(a > 0.0)) throw ComputationError("fit_fringe: mean intensity must be positive");
  const double r = std::hypot(b, c);

  FringeFit f;
  f.i_max = 2.0 * a;
  f.visibility = std::min(1.0, r / a);
  f.phi0 = std::atan2(c, b);
  const Eigen::Matrix3d& cov = sol.covariance;
  if (r > 0.0) {
    const Eigen::Vector3d grad_v(-r / (a * a), b / (r * a), c / (r * a));
    f.stderr_v = std::sqrt(std::max(0.0, grad_v.dot(cov * grad_v)));
    const Eigen::Vector3d grad_phi(0.0, -c / (r * r), b / (r * r));
    f.stderr_phi0 = std::sqrt(std::max(0.0, grad_phi.dot(cov * grad_phi)));
  } else {
    f.stderr_v = std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2)))) / a;
    f.stderr_phi0 = std::numbers::pi;
  }
  return f;
}

}  // namespace afc
