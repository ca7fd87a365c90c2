#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "afc/error.hpp"
#include "afc/experiment.hpp"

using namespace afc;

namespace {

StorageConfig storage_config() {
  StorageConfig c;
  CombParams comb;
  comb.delta = 0.125;
  comb.finesse = 4.0;
  comb.bandwidth = 2.0;
  comb.tooth_shape = ToothShape::square;
  comb.peak_depth = 0.9;
  comb.background_depth = 0.3;
  c.comb = comb;
  SpinParams spin;
  spin.tau_s = 2.5;
  spin.tau_c = 2.5;
  spin.eta_t = 1.0;
  spin.gamma_s = 0.033;
  spin.chirp_bandwidth = 2.0;
  c.spin = spin;
  c.noise.sigma = 0.0;
  return c;
}

std::string message_of(const StorageConfig& c) {
  try {
    run_full_storage_experiment(c);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

BurnStep flat(const std::string& t, double center) {
  BurnStep s;
  s.transition = t;
  s.center = center;
  s.width = 3.0;
  s.strength = 20.0;
  return s;
}

}  // namespace

TEST(FullStorage, TwoLevelEchoAtStorageTime) {
  StorageConfig c = storage_config();
  c.spin.reset();
  const StorageResult r = run_full_storage_experiment(c);
  EXPECT_EQ(r.comb_period, 0.125);
  EXPECT_NEAR(r.echo.echo_time, 8.0, 0.05);
  ASSERT_TRUE(r.analytic_efficiency.has_value());
  EXPECT_NEAR(r.echo.echo_efficiency / *r.analytic_efficiency, 1.0, 0.05);
  EXPECT_GT(r.echo.echo_efficiency, 0.02);
  EXPECT_LT(r.echo.echo_efficiency, 0.03);
  EXPECT_FALSE(r.spin.has_value());
}

TEST(FullStorage, SpinWaveEchoAtTotalTime) {
  const StorageResult r = run_full_storage_experiment(storage_config());
  ASSERT_TRUE(r.spin.has_value());
  EXPECT_EQ(r.spin->t_total, 10.5);
  EXPECT_NEAR(r.spin->echo_time, 10.5, 0.05);
  EXPECT_NEAR(r.spin->echo_efficiency,
              r.spin->two_level_efficiency * std::exp(-2.0 * std::numbers::pi * 0.033 * 2.5), 1e-3);
}

TEST(FullStorage, NoiselessDecaySweepIsExact) {
  StorageConfig c = storage_config();
  for (int k = 1; k <= 12; ++k) c.decay_taus.push_back(2.5 * k);
  for (AmplitudeConvention conv : {AmplitudeConvention::field, AmplitudeConvention::intensity}) {
    c.spin->amplitude_convention = conv;
    const StorageResult r = run_full_storage_experiment(c);
    ASSERT_TRUE(r.decay_fit.has_value());
    EXPECT_NEAR(r.decay_fit->derived_constant, 0.033, 1e-6) << to_string(conv);
  }
}

TEST(FullStorage, ErrorsNameTheirStage) {
  StorageConfig c = storage_config();
  c.comb->finesse = 0.5;
  EXPECT_EQ(message_of(c).rfind("validation: ", 0), 0u) << message_of(c);

  c = storage_config();
  c.grid = FrequencyGrid::with_spacing(0.125 / 8, 1024);
  EXPECT_EQ(message_of(c).rfind("comb-preparation: ", 0), 0u) << message_of(c);

  c = storage_config();
  c.pulse.fwhm = 0.02;
  c.pulse.lead = 6.0;
  EXPECT_EQ(message_of(c).rfind("echo-propagation: ", 0), 0u) << message_of(c);

  c = storage_config();
  c.spin->tau_c = 6.0;
  c.spin->tau_s = 6.0;
  EXPECT_EQ(message_of(c).rfind("spin-wave: ", 0), 0u) << message_of(c);

  c = storage_config();
  c.decay_taus = {2.5, 5.0};
  EXPECT_EQ(message_of(c).rfind("decay-fit: ", 0), 0u) << message_of(c);
}

TEST(FullStorage, StageErrorsKeepTheirType) {
  StorageConfig c = storage_config();
  c.comb->finesse = 0.5;
  EXPECT_THROW(run_full_storage_experiment(c), PreconditionError);
  c = storage_config();
  c.decay_taus = {2.5};
  c.spin.reset();
  EXPECT_THROW(run_full_storage_experiment(c), PreconditionError);
}

TEST(FullStorage, BurnPreparation) {
  Eigen::Matrix3d b;
  b << 0.2, 0.3, 0.5, 0.3, 0.4, 0.3, 0.5, 0.3, 0.2;
  const HyperfineScheme scheme({0, 3.454, 8.074}, {0, 7.5, 17.7}, b);
  const double o0 = scheme.transition_offset(HyperfineScheme::transition("f0"));
  const double c1 = scheme.transition_offset(HyperfineScheme::transition("f1")) - o0;
  const double c2 = scheme.transition_offset(HyperfineScheme::transition("f2")) - o0;

  BurnSetup setup{.sequence = {}, .scheme = scheme, .line = {}};
  setup.line.shape = LineShape::gaussian;
  setup.line.fwhm = 2000.0;
  setup.line.peak_depth = 0.9;
  for (int i = 0; i < 3; ++i) {
    setup.sequence.steps.push_back(flat("f1", c1));
    setup.sequence.steps.push_back(flat("f2", c2));
  }
  setup.sequence.steps.push_back(flat("f1", c1));
  BurnStep comb = flat("f0", 0.0);
  comb.width = 2.0;
  comb.pattern = BurnStep::Pattern::comb;
  comb.comb_delta = 0.125;
  comb.comb_finesse = 2.0;
  for (int i = 0; i < 3; ++i) {
    setup.sequence.steps.push_back(comb);
    setup.sequence.steps.push_back(flat("f1", c1));
  }

  StorageConfig c;
  c.grid = FrequencyGrid::with_spacing(0.125 / 32, 8192);
  c.burn = setup;
  c.noise.sigma = 0.0;
  const StorageResult r = run_full_storage_experiment(c);
  EXPECT_EQ(r.comb_period, 0.125);
  EXPECT_TRUE(r.populations.has_value());
  EXPECT_FALSE(r.analytic_efficiency.has_value());
  EXPECT_NEAR(r.echo.echo_time, 8.0, 0.1);
  EXPECT_GT(r.echo.echo_efficiency, 1e-4);
}
