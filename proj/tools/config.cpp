#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "afc/error.hpp"

namespace afc::cli {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and remembers which were consumed, so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + ": missing required key '" + key + "'");
    return convert<T>(key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? convert<T>(key) : fallback;
  }

  template <typename T>
  std::optional<T> maybe(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Section sub(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + ": missing required section '" + key + "'");
    used_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong value type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-labels validation failures with the config section they came from.
template <typename F>
void check(const std::string& section, F&& body) {
  try {
    body();
  } catch (const PreconditionError& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

FrequencyGrid parse_grid(Section s) {
  const auto n = s.get<std::size_t>("n_points");
  const auto center = s.get_or<double>("center_abs_thz", 0.0);
  const auto span = s.maybe<double>("span_mhz");
  const auto spacing = s.maybe<double>("spacing_mhz");
  s.finish();
  if (span.has_value() == spacing.has_value())
    throw ConfigError(s.path() + ": give exactly one of 'span_mhz' or 'spacing_mhz'");
  try {
    return spacing ? FrequencyGrid::with_spacing(*spacing, n, center) : FrequencyGrid(*span, n, center);
  } catch (const PreconditionError& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
}

InhomogeneousLine parse_line(Section s) {
  InhomogeneousLine line;
  line.shape = line_shape_from_string(s.get_or<std::string>("shape", "gaussian"));
  line.fwhm = s.get<double>("fwhm_mhz");
  line.center_offset = s.get_or<double>("center_offset_mhz", 0.0);
  line.peak_depth = s.get<double>("peak_depth");
  s.finish();
  check(s.path(), [&] { line.validate(); });
  return line;
}

HyperfineScheme parse_scheme(Section s) {
  const auto ground = s.get<std::array<double, 3>>("ground_offsets_mhz");
  const auto excited = s.get<std::array<double, 3>>("excited_offsets_mhz");
  const auto rows = s.get<std::array<std::array<double, 3>, 3>>("branching");
  s.finish();
  Eigen::Matrix3d b;
  for (int g = 0; g < 3; ++g)
    for (int e = 0; e < 3; ++e) b(g, e) = rows[g][e];
  try {
    return HyperfineScheme(ground, excited, b);
  } catch (const PreconditionError& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
}

CombParams parse_comb(Section s) {
  CombParams c;
  c.delta = s.get<double>("delta_mhz");
  c.finesse = s.get<double>("finesse");
  c.bandwidth = s.get<double>("bandwidth_mhz");
  c.tooth_shape = tooth_shape_from_string(s.get_or<std::string>("tooth_shape", "square"));
  c.peak_depth = s.get<double>("peak_depth");
  c.background_depth = s.get_or<double>("background_depth", 0.0);
  s.finish();
  check(s.path(), [&] { c.validate(); });
  return c;
}

BurnStep::Pattern pattern_from_string(const std::string& name, const std::string& path) {
  if (name == "flat") return BurnStep::Pattern::flat;
  if (name == "comb") return BurnStep::Pattern::comb;
  throw ConfigError(path + ": unknown burn pattern '" + name + "'");
}

BurnSequence parse_burn(Section s) {
  BurnSequence seq;
  seq.cycles = s.get_or<int>("cycles", 1);
  const json& steps = s.raw("steps");
  s.finish();
  if (!steps.is_array()) throw ConfigError(s.path() + ".steps: expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Section st(steps[i], s.path() + ".steps[" + std::to_string(i) + "]");
    BurnStep b;
    b.transition = st.get<std::string>("transition");
    b.center = st.get<double>("center_mhz");
    b.width = st.get<double>("width_mhz");
    b.pattern = pattern_from_string(st.get_or<std::string>("pattern", "flat"), st.path());
    if (b.pattern == BurnStep::Pattern::comb) {
      b.comb_delta = st.get<double>("comb_delta_mhz");
      b.comb_finesse = st.get<double>("comb_finesse");
    }
    b.strength = st.get<double>("strength");
    b.repetitions = st.get_or<int>("repetitions", 1);
    st.finish();
    seq.steps.push_back(b);
  }
  check(s.path(), [&] { seq.validate(); });
  return seq;
}

PulseSpec parse_pulse(Section s) {
  PulseSpec p;
  p.fwhm = s.get<double>("fwhm_us");
  p.lead = s.get_or<double>("lead_us", 8.0 * p.fwhm);
  p.carrier_detuning = s.get_or<double>("carrier_detuning_mhz", 0.0);
  s.finish();
  check(s.path(), [&] { p.validate(); });
  return p;
}

SpinParams parse_spin(Section s, std::vector<double>& decay_taus) {
  SpinParams p;
  p.gamma_s = s.get<double>("gamma_s_mhz");
  p.eta_t = s.get_or<double>("eta_t", 1.0);
  p.tau_c = s.get_or<double>("tau_c_us", 2.5);
  p.tau_s = s.get<double>("tau_s_us");
  p.chirp_bandwidth = s.get_or<double>("chirp_bandwidth_mhz", 2.0);
  p.amplitude_convention = amplitude_convention_from_string(s.get_or<std::string>("amplitude_convention", "field"));
  decay_taus = s.get_or<std::vector<double>>("decay_taus_us", {});
  s.finish();
  check(s.path(), [&] { p.validate(); });
  return p;
}

NoiseModel parse_noise(Section s) {
  NoiseModel n;
  n.kind = noise_kind_from_string(s.get_or<std::string>("kind", "multiplicative_gaussian"));
  n.sigma = s.get_or<double>("sigma", 0.03);
  s.finish();
  check(s.path(), [&] { n.validate(); });
  return n;
}

ExperimentSection parse_experiment(Section s) {
  ExperimentSection e;
  e.kind = s.get<std::string>("kind");
  static const std::set<std::string> kinds{"comb", "store", "spinwave", "t2", "fringe"};
  if (!kinds.count(e.kind)) throw ConfigError(s.path() + ": unknown experiment kind '" + e.kind + "'");
  e.replicas = s.get_or<int>("replicas", 1);
  if (e.replicas < 1) throw ConfigError(s.path() + ": replicas must be >= 1");
  e.window_half_width = s.maybe<double>("window_half_width_us");
  e.reference = s.maybe<double>("reference");
  e.reference_stderr = s.maybe<double>("reference_stderr");

  if (e.kind == "t2") {
    const json& samples = s.raw("samples");
    if (!samples.is_array() || samples.empty()) throw ConfigError(s.path() + ".samples: expected a non-empty array");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      Section st(samples[i], s.path() + ".samples[" + std::to_string(i) + "]");
      T2Sample t;
      t.label = st.get_or<std::string>("label", "sample" + std::to_string(i));
      t.t2 = st.get<double>("t2_us");
      t.reference = st.maybe<double>("reference_t2_us");
      t.reference_stderr = st.maybe<double>("reference_stderr_us");
      st.finish();
      if (!(t.t2 > 0.0)) throw ConfigError(st.path() + ": t2_us must be positive");
      e.t2_samples.push_back(t);
    }
    e.spacings = s.get<std::vector<double>>("spacings_us");
    e.amplitude0 = s.get_or<double>("amplitude0", 1.0);
  } else if (e.kind == "fringe") {
    e.i_echo = s.get_or<double>("i_echo", 1.0);
    e.i_ref = s.get_or<double>("i_ref", 1.0);
    e.overlap = s.get<double>("overlap");
    e.phi0 = s.get_or<double>("phi0_rad", 0.0);
    e.step_deg = s.get_or<double>("step_deg", 30.0);
  }
  s.finish();
  return e;
}

void need(bool present, const std::string& kind, const std::string& section) {
  if (!present) throw ConfigError("experiment '" + kind + "' requires section '" + section + "'");
}

}  // namespace

void RunConfig::validate() const {
  const std::string& k = experiment.kind;
  if (k == "comb" || k == "store" || k == "spinwave") {
    need(grid.has_value(), k, "grid");
    if (comb.has_value() == burn.has_value())
      throw ConfigError("experiment '" + k + "' requires exactly one of sections 'comb' or 'burn'");
    if (burn) {
      need(scheme.has_value(), k, "scheme");
      need(line.has_value(), k, "line");
    }
    if (k != "comb") need(pulse.has_value(), k, "pulse");
    if (k == "spinwave") need(spin.has_value(), k, "spin");
    if (k != "comb") {
      try {
        storage().validate();
      } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
      }
    }
  } else if (k == "t2") {
    for (std::size_t i = 0; i < experiment.spacings.size(); ++i) {
      if (!(experiment.spacings[i] > 0.0) || (i && experiment.spacings[i] <= experiment.spacings[i - 1]))
        throw ConfigError("experiment.spacings_us: must be positive and strictly increasing");
    }
    if (experiment.spacings.size() < 3) throw ConfigError("experiment.spacings_us: need at least 3 spacings");
  } else if (k == "fringe") {
    if (experiment.i_echo < 0.0 || experiment.i_ref < 0.0)
      throw ConfigError("experiment: intensities must be >= 0");
    if (experiment.overlap < 0.0 || experiment.overlap > 1.0)
      throw ConfigError("experiment.overlap: must lie in [0, 1]");
    if (!(experiment.step_deg > 0.0)) throw ConfigError("experiment.step_deg: must be positive");
  }
}

StorageConfig RunConfig::storage() const {
  if (!grid) throw ConfigError("storage experiment requires section 'grid'");
  StorageConfig s;
  s.grid = *grid;
  s.comb = comb;
  if (burn) s.burn = BurnSetup{*burn, *scheme, *line};
  s.pulse = pulse.value_or(PulseSpec{});
  s.spin = spin;
  s.decay_taus = decay_taus;
  s.noise = noise.with_seed(seed);
  s.window_half_width = experiment.window_half_width;
  return s;
}

RunConfig parse_config(const json& doc) {
  Section root(doc, "config");
  RunConfig c;
  c.experiment = parse_experiment(root.sub("experiment"));
  if (root.has("grid")) c.grid = parse_grid(root.sub("grid"));
  if (root.has("line")) c.line = parse_line(root.sub("line"));
  if (root.has("scheme")) c.scheme = parse_scheme(root.sub("scheme"));
  if (root.has("comb")) c.comb = parse_comb(root.sub("comb"));
  if (root.has("burn")) c.burn = parse_burn(root.sub("burn"));
  if (root.has("pulse")) c.pulse = parse_pulse(root.sub("pulse"));
  if (root.has("spin")) c.spin = parse_spin(root.sub("spin"), c.decay_taus);
  if (root.has("noise")) c.noise = parse_noise(root.sub("noise"));
  c.seed = root.get_or<std::uint64_t>("seed", 0);
  c.output_dir = root.get_or<std::string>("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json doc;
  json& e = doc["experiment"];
  e["kind"] = c.experiment.kind;
  if (c.experiment.replicas != 1) e["replicas"] = c.experiment.replicas;
  if (c.experiment.window_half_width) e["window_half_width_us"] = *c.experiment.window_half_width;
  if (c.experiment.reference) e["reference"] = *c.experiment.reference;
  if (c.experiment.reference_stderr) e["reference_stderr"] = *c.experiment.reference_stderr;
  if (c.experiment.kind == "t2") {
    json samples = json::array();
    for (const T2Sample& t : c.experiment.t2_samples) {
      json s{{"label", t.label}, {"t2_us", t.t2}};
      if (t.reference) s["reference_t2_us"] = *t.reference;
      if (t.reference_stderr) s["reference_stderr_us"] = *t.reference_stderr;
      samples.push_back(s);
    }
    e["samples"] = samples;
    e["spacings_us"] = c.experiment.spacings;
    e["amplitude0"] = c.experiment.amplitude0;
  } else if (c.experiment.kind == "fringe") {
    e["i_echo"] = c.experiment.i_echo;
    e["i_ref"] = c.experiment.i_ref;
    e["overlap"] = c.experiment.overlap;
    e["phi0_rad"] = c.experiment.phi0;
    e["step_deg"] = c.experiment.step_deg;
  }

  if (c.grid) {
    doc["grid"] = {{"spacing_mhz", c.grid->spacing()},
                   {"n_points", c.grid->size()},
                   {"center_abs_thz", c.grid->center_abs_thz()}};
  }
  if (c.line) {
    doc["line"] = {{"shape", std::string(to_string(c.line->shape))},
                   {"fwhm_mhz", c.line->fwhm},
                   {"center_offset_mhz", c.line->center_offset},
                   {"peak_depth", c.line->peak_depth}};
  }
  if (c.scheme) {
    json rows = json::array();
    for (int g = 0; g < 3; ++g)
      rows.push_back({c.scheme->branching()(g, 0), c.scheme->branching()(g, 1), c.scheme->branching()(g, 2)});
    doc["scheme"] = {{"ground_offsets_mhz", c.scheme->ground_offsets()},
                     {"excited_offsets_mhz", c.scheme->excited_offsets()},
                     {"branching", rows}};
  }
  if (c.comb) {
    doc["comb"] = {{"delta_mhz", c.comb->delta},
                   {"finesse", c.comb->finesse},
                   {"bandwidth_mhz", c.comb->bandwidth},
                   {"tooth_shape", std::string(to_string(c.comb->tooth_shape))},
                   {"peak_depth", c.comb->peak_depth},
                   {"background_depth", c.comb->background_depth}};
  }
  if (c.burn) {
    json steps = json::array();
    for (const BurnStep& b : c.burn->steps) {
      json s{{"transition", b.transition},
             {"center_mhz", b.center},
             {"width_mhz", b.width},
             {"pattern", b.pattern == BurnStep::Pattern::comb ? "comb" : "flat"},
             {"strength", b.strength},
             {"repetitions", b.repetitions}};
      if (b.pattern == BurnStep::Pattern::comb) {
        s["comb_delta_mhz"] = b.comb_delta;
        s["comb_finesse"] = b.comb_finesse;
      }
      steps.push_back(s);
    }
    doc["burn"] = {{"cycles", c.burn->cycles}, {"steps", steps}};
  }
  if (c.pulse) {
    doc["pulse"] = {{"fwhm_us", c.pulse->fwhm},
                    {"lead_us", c.pulse->lead},
                    {"carrier_detuning_mhz", c.pulse->carrier_detuning}};
  }
  if (c.spin) {
    doc["spin"] = {{"gamma_s_mhz", c.spin->gamma_s},
                   {"eta_t", c.spin->eta_t},
                   {"tau_c_us", c.spin->tau_c},
                   {"tau_s_us", c.spin->tau_s},
                   {"chirp_bandwidth_mhz", c.spin->chirp_bandwidth},
                   {"amplitude_convention", std::string(to_string(c.spin->amplitude_convention))}};
    if (!c.decay_taus.empty()) doc["spin"]["decay_taus_us"] = c.decay_taus;
  }
  doc["noise"] = {{"kind", std::string(to_string(c.noise.kind))}, {"sigma", c.noise.sigma}};
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir;
  return doc;
}

}  // namespace afc::cli
