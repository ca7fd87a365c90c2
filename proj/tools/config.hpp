#pragma once

// Run configuration: one JSON document per run with sections mirroring the
// library types. Unknown keys are rejected so typos never pass silently.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afc/comb.hpp"
#include "afc/experiment.hpp"
#include "afc/fitting.hpp"
#include "afc/spectral.hpp"
#include "afc/spin_wave.hpp"
#include "json.hpp"

namespace afc::cli {

struct T2Sample {
  std::string label;
  double t2 = 0.0;  // us, ground truth fed to the simulation
  std::optional<double> reference;         // fitted value to compare against
  std::optional<double> reference_stderr;  // its quoted uncertainty
};

struct ExperimentSection {
  std::string kind;  // comb | store | spinwave | t2 | fringe

  // t2
  std::vector<T2Sample> t2_samples;
  std::vector<double> spacings;  // us
  double amplitude0 = 1.0;

  // fringe
  double i_echo = 1.0;
  double i_ref = 1.0;
  double overlap = 0.95;
  double phi0 = 0.0;  // radians
  double step_deg = 30.0;

  // spinwave decay sweep and fringe references
  std::optional<double> reference;
  std::optional<double> reference_stderr;

  std::optional<double> window_half_width;  // us
  int replicas = 1;  // sweep fan-out
};

struct RunConfig {
  ExperimentSection experiment;
  std::optional<FrequencyGrid> grid;
  std::optional<InhomogeneousLine> line;
  std::optional<HyperfineScheme> scheme;
  std::optional<CombParams> comb;
  std::optional<BurnSequence> burn;
  std::optional<PulseSpec> pulse;
  std::optional<SpinParams> spin;
  std::vector<double> decay_taus;  // us, spin.decay_taus_us
  NoiseModel noise;
  std::uint64_t seed = 0;
  std::string output_dir = "afc-out";

  /// Checks that every section the experiment kind needs is present and valid.
  void validate() const;
  /// Storage pipeline configuration (store / spinwave / comb kinds).
  StorageConfig storage() const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace afc::cli
