#include "commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "afc/echo.hpp"
#include "afc/error.hpp"
#include "afc/table_io.hpp"

namespace afc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fs::filesystem_error("cannot read", path, std::error_code());
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(md, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md, digest, &len);
  EVP_MD_CTX_free(md);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

RunContext::RunContext(const RunConfig& config, fs::path out_dir, std::string command, std::ostream* log)
    : config_(config), out_dir_(std::move(out_dir)), command_(std::move(command)), log_(log) {
  fs::create_directories(out_dir_);
  started_ = utc_timestamp();
}

void RunContext::emit_json(const std::string& name, const json& doc) {
  emit(name, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
}

void RunContext::record(const std::string& name) {
  const fs::path p = out_dir_ / name;
  files_.push_back({name, sha256_file(p), fs::file_size(p)});
}

void RunContext::finish() {
  json files = json::array();
  for (const EmittedFile& f : files_) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json manifest{{"tool", "afc"},
                {"version", AFC_VERSION},
                {"command", command_},
                {"seed", config_.seed},
                {"config", to_json(config_)},
                {"started", started_},
                {"finished", utc_timestamp()},
                {"files", files}};
  std::ofstream os(out_dir_ / "manifest.json", std::ios::binary);
  os << manifest.dump(2) << '\n';
  if (!os) throw fs::filesystem_error("write failed", out_dir_ / "manifest.json", std::error_code());
}

namespace {

void say(const RunContext& ctx, const std::string& line) {
  if (ctx.log()) *ctx.log() << line << '\n';
}

std::string fmt(double v) { return format_number(v); }

json echo_json(const EchoReport& r) {
  return {{"echo_time_us", r.echo_time},
          {"echo_efficiency", r.echo_efficiency},
          {"transmitted_fraction", r.transmitted_fraction},
          {"window_us", {r.window_lo, r.window_hi}}};
}

json decay_fit_json(const DecayFit& f) {
  json j{{"rate_per_us", f.rate},
         {"intercept", f.intercept},
         {"stderr_rate", f.stderr_rate},
         {"stderr_intercept", f.stderr_intercept},
         {"unbounded", f.unbounded}};
  if (!f.unbounded) {
    j["derived_constant"] = f.derived_constant;
    j["derived_stderr"] = f.derived_stderr;
  }
  return j;
}

json fringe_json(const FringeFit& f) {
  return {{"i_max", f.i_max},
          {"visibility", f.visibility},
          {"phi0_rad", f.phi0},
          {"stderr_visibility", f.stderr_v},
          {"stderr_phi0", f.stderr_phi0}};
}

void emit_series(RunContext& ctx, const std::string& name, const std::string& title, const Series& s,
                 const std::string& xcol, const std::string& ycol) {
  Table t{title, {}, {xcol, ycol}, {s.x, s.y}};
  ctx.emit(name, [&](std::ostream& os) { write_table(os, t); });
}

struct Comparison {
  std::string label;
  double fitted;
  double stderr_fit;
  std::optional<double> reference;
  std::optional<double> reference_stderr;

  bool within() const { return reference && reference_stderr && std::abs(fitted - *reference) <= *reference_stderr; }
};

// Fitted values next to the reference values given in the config.
void emit_summary(RunContext& ctx, const std::vector<Comparison>& rows, const std::string& quantity) {
  bool any = false;
  for (const auto& r : rows) any = any || r.reference.has_value();
  if (!any) return;
  ctx.emit("summary.tsv", [&](std::ostream& os) {
    os << "# fitted " << quantity << " against reference values\n";
    os << "# label\tfitted\tstderr\treference\treference_stderr\twithin_reference_error\n";
    for (const auto& r : rows) {
      os << r.label << '\t' << fmt(r.fitted) << '\t' << fmt(r.stderr_fit) << '\t'
         << (r.reference ? fmt(*r.reference) : "nan") << '\t'
         << (r.reference_stderr ? fmt(*r.reference_stderr) : "nan") << '\t' << (r.within() ? 1 : 0) << '\n';
    }
  });
  for (const auto& r : rows) {
    if (r.reference) {
      say(ctx, r.label + ": fitted " + quantity + " " + fmt(r.fitted) + " +- " + fmt(r.stderr_fit) + " (reference " +
                   fmt(*r.reference) + (r.reference_stderr ? " +- " + fmt(*r.reference_stderr) : "") + ")");
    }
  }
}

void emit_trace(RunContext& ctx, const std::string& name, const PulseEnvelope& p, const std::string& title) {
  ctx.emit(name, [&](std::ostream& os) { write_trace(os, p, title); });
}

// Comb window of the preparation: (center, bandwidth).
std::pair<double, double> comb_window(const RunConfig& c) {
  if (c.comb) return {0.0, c.comb->bandwidth};
  for (auto it = c.burn->steps.rbegin(); it != c.burn->steps.rend(); ++it)
    if (it->pattern == BurnStep::Pattern::comb) return {it->center, it->width};
  throw ConfigError("burn: sequence has no comb-patterned step");
}

json comb_json(const CombMeasurement& m) {
  return {{"period_mhz", m.period},
          {"tooth_fwhm_mhz", m.tooth_fwhm},
          {"peak_depth", m.peak_depth},
          {"background_depth", m.background},
          {"teeth", m.teeth}};
}

void require_kind(const RunConfig& c, std::initializer_list<const char*> kinds, const std::string& command) {
  for (const char* k : kinds)
    if (c.experiment.kind == k) return;
  throw ConfigError("command '" + command + "' cannot run an experiment of kind '" + c.experiment.kind + "'");
}

std::vector<Series> t2_series(const RunConfig& c, const NoiseModel& noise) {
  std::vector<Series> out;
  for (std::size_t i = 0; i < c.experiment.t2_samples.size(); ++i) {
    out.push_back(simulate_two_pulse_echo(c.experiment.t2_samples[i].t2, c.experiment.spacings,
                                          noise.with_seed(derive_seed(noise.seed, i)), c.experiment.amplitude0));
  }
  return out;
}

Series fringe_series(const RunConfig& c, const NoiseModel& noise) {
  const auto& e = c.experiment;
  return simulate_interference(e.i_echo, e.i_ref, e.overlap, e.phi0, phase_scan(e.step_deg), noise);
}

}  // namespace

void run_comb(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"comb", "store", "spinwave"}, "comb");
  const auto [center, bandwidth] = comb_window(c);
  AbsorptionProfile profile = AbsorptionProfile::transparent(*c.grid);
  json result{{"command", "comb"}};
  if (c.comb) {
    profile = parametric_comb(*c.comb, *c.grid);
    result["preparation"] = "parametric";
  } else {
    const HoleBurningResult burned = simulate_hole_burning(*c.burn, *c.scheme, *c.line, *c.grid);
    profile = burned.profile;
    result["preparation"] = "hole_burning";
    const auto f1 = HyperfineScheme::transition("f1");
    const auto f0 = HyperfineScheme::transition("f0");
    const double lo = center - 0.5 * bandwidth, hi = center + 0.5 * bandwidth;
    result["mean_populations_in_band"] = {
        mean_level_population(burned.state, f0.ground, f0, *c.grid, lo, hi),
        mean_level_population(burned.state, f1.ground, f0, *c.grid, lo, hi),
        mean_level_population(burned.state, 2, f0, *c.grid, lo, hi)};
  }
  const CombMeasurement m = measure_comb(profile, center, bandwidth);
  result["comb"] = comb_json(m);
  ctx.emit("profile.tsv", [&](std::ostream& os) { write_profile(os, profile); });
  ctx.emit_json("result.json", result);
  say(ctx, "comb: period " + fmt(m.period) + " MHz, " + std::to_string(m.teeth) + " teeth, tooth FWHM " +
               fmt(m.tooth_fwhm) + " MHz");
}

void run_store(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"store"}, "store");
  StorageConfig sc = c.storage();
  sc.spin.reset();
  sc.decay_taus.clear();
  const StorageResult r = run_full_storage_experiment(sc);
  json result{{"command", "store"}, {"comb_period_mhz", r.comb_period}, {"echo", echo_json(r.echo)}};
  if (r.analytic_efficiency) result["analytic_efficiency"] = *r.analytic_efficiency;
  ctx.emit("profile.tsv", [&](std::ostream& os) { write_profile(os, r.profile); });
  emit_trace(ctx, "input.tsv", r.input, "input pulse");
  emit_trace(ctx, "output.tsv", r.output, "two-level AFC output");
  ctx.emit_json("result.json", result);
  say(ctx, "store: echo at " + fmt(r.echo.echo_time) + " us, efficiency " + fmt(r.echo.echo_efficiency));
}

void run_spinwave(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"spinwave"}, "spinwave");
  const StorageResult r = run_full_storage_experiment(c.storage());
  const SpinWaveResult& s = *r.spin;
  json result{{"command", "spinwave"},
              {"comb_period_mhz", r.comb_period},
              {"two_level_echo", echo_json(r.echo)},
              {"spin_wave",
               {{"t_total_us", s.t_total},
                {"echo_time_us", s.echo_time},
                {"echo_amplitude", s.echo_amplitude},
                {"echo_efficiency", s.echo_efficiency},
                {"two_level_efficiency", s.two_level_efficiency},
                {"suppressed_two_level_fraction", s.suppressed_two_level_fraction},
                {"control_times_us", {s.control1_time, s.control2_time}}}}};
  ctx.emit("profile.tsv", [&](std::ostream& os) { write_profile(os, r.profile); });
  emit_trace(ctx, "input.tsv", r.input, "input pulse");
  emit_trace(ctx, "trace.tsv", r.output, "spin-wave AFC output");
  if (r.decay) {
    const bool field = c.spin->amplitude_convention == AmplitudeConvention::field;
    emit_series(ctx, "decay.tsv", "spin-wave echo decay", *r.decay, "tau_s_us", field ? "amplitude" : "intensity");
    result["decay_fit"] = decay_fit_json(*r.decay_fit);
    result["decay_fit"]["quantity"] = "gamma_s_mhz";
    emit_summary(ctx, {{"gamma_s_mhz", r.decay_fit->derived_constant, r.decay_fit->derived_stderr,
                        c.experiment.reference, c.experiment.reference_stderr}},
                 "gamma_s (MHz)");
  }
  ctx.emit_json("result.json", result);
  say(ctx, "spinwave: t_total " + fmt(s.t_total) + " us, echo at " + fmt(s.echo_time) + " us, efficiency " +
               fmt(s.echo_efficiency));
}

void run_t2(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"t2"}, "t2");
  const std::vector<Series> data = t2_series(c, c.noise.with_seed(c.seed));
  json fits = json::object();
  std::vector<Comparison> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const T2Sample& s = c.experiment.t2_samples[i];
    emit_series(ctx, "t2_" + s.label + ".tsv", "two-pulse echo decay, " + s.label, data[i], "spacing_us",
                "amplitude");
    const DecayFit f = fit_log_linear(data[i], DecayKind::two_pulse_echo);
    fits[s.label] = decay_fit_json(f);
    fits[s.label]["true_t2_us"] = s.t2;
    rows.push_back({s.label, f.derived_constant, f.derived_stderr, s.reference, s.reference_stderr});
    say(ctx, "t2 " + s.label + ": T2 = " + fmt(f.derived_constant) + " +- " + fmt(f.derived_stderr) + " us");
  }
  ctx.emit_json("result.json", {{"command", "t2"}, {"fits", fits}});
  emit_summary(ctx, rows, "T2 (us)");
}

void run_fringe(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"fringe"}, "fringe");
  const Series data = fringe_series(c, c.noise.with_seed(c.seed));
  const FringeFit f = fit_fringe(data);
  emit_series(ctx, "fringe.tsv", "interference fringe", data, "phase_rad", "intensity");
  ctx.emit_json("result.json", {{"command", "fringe"}, {"fit", fringe_json(f)}});
  emit_summary(ctx, {{"visibility", f.visibility, f.stderr_v, c.experiment.reference, c.experiment.reference_stderr}},
               "V");
  say(ctx, "fringe: V = " + fmt(f.visibility) + " +- " + fmt(f.stderr_v));
}

void run_sweep(RunContext& ctx) {
  const RunConfig& c = ctx.config();
  require_kind(c, {"t2", "fringe", "spinwave"}, "sweep");
  const int n = c.experiment.replicas;

  // Every replica gets its own seed derived from the run seed; rows are
  // written in replica order so the table does not depend on scheduling.
  std::vector<std::string> labels;
  std::vector<std::vector<double>> estimate, stderr_est;
  std::vector<std::optional<double>> refs, ref_errs;
  Series clean_decay;
  DecayKind decay_kind = DecayKind::spin_wave_field;

  if (c.experiment.kind == "t2") {
    for (const auto& s : c.experiment.t2_samples) {
      labels.push_back(s.label);
      refs.push_back(s.reference);
      ref_errs.push_back(s.reference_stderr);
    }
  } else {
    labels.push_back(c.experiment.kind == "fringe" ? "visibility" : "gamma_s_mhz");
    refs.push_back(c.experiment.reference);
    ref_errs.push_back(c.experiment.reference_stderr);
    if (c.experiment.kind == "spinwave") {
      StorageConfig sc = c.storage();
      require(!sc.decay_taus.empty(), "sweep: spinwave sweep needs spin.decay_taus_us");
      sc.noise.sigma = 0.0;
      const StorageResult r = run_full_storage_experiment(sc);
      clean_decay = *r.decay;
      decay_kind = r.decay_fit->kind;
    }
  }
  estimate.assign(labels.size(), std::vector<double>(n));
  stderr_est.assign(labels.size(), std::vector<double>(n));

  for (int k = 0; k < n; ++k) {
    const NoiseModel noise = c.noise.with_seed(derive_seed(c.seed, static_cast<std::uint64_t>(k)));
    if (c.experiment.kind == "t2") {
      const std::vector<Series> data = t2_series(c, noise);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const DecayFit f = fit_log_linear(data[i], DecayKind::two_pulse_echo);
        estimate[i][k] = f.derived_constant;
        stderr_est[i][k] = f.derived_stderr;
      }
    } else if (c.experiment.kind == "fringe") {
      const FringeFit f = fit_fringe(fringe_series(c, noise));
      estimate[0][k] = f.visibility;
      stderr_est[0][k] = f.stderr_v;
    } else {
      const DecayFit f = fit_log_linear(apply_noise(clean_decay, noise), decay_kind);
      estimate[0][k] = f.derived_constant;
      stderr_est[0][k] = f.derived_stderr;
    }
  }

  ctx.emit("replicas.tsv", [&](std::ostream& os) {
    os << "# per-replica estimates\n# replica\tseed";
    for (const auto& l : labels) os << '\t' << l << '\t' << l << "_stderr";
    os << '\n';
    for (int k = 0; k < n; ++k) {
      os << k << '\t' << derive_seed(c.seed, static_cast<std::uint64_t>(k));
      for (std::size_t i = 0; i < labels.size(); ++i) os << '\t' << fmt(estimate[i][k]) << '\t' << fmt(stderr_est[i][k]);
      os << '\n';
    }
  });

  json summary = json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Eigen::Map<const Eigen::ArrayXd> e(estimate[i].data(), n), s(stderr_est[i].data(), n);
    const double mean = e.mean();
    const double sd = n > 1 ? std::sqrt((e - mean).square().sum() / (n - 1)) : 0.0;
    json row{{"mean", mean}, {"std", sd}, {"mean_stderr", s.mean()}, {"replicas", n}};
    if (refs[i] && ref_errs[i]) {
      const double within = ((e - *refs[i]).abs() <= *ref_errs[i]).cast<double>().mean();
      row["reference"] = *refs[i];
      row["reference_stderr"] = *ref_errs[i];
      row["fraction_within_reference"] = within;
    }
    summary[labels[i]] = row;
    say(ctx, "sweep " + labels[i] + ": mean " + fmt(mean) + ", std " + fmt(sd) + " over " + std::to_string(n) +
                 " replicas");
  }
  ctx.emit_json("result.json", {{"command", "sweep"}, {"kind", c.experiment.kind}, {"summary", summary}});
}

fs::path preset_path(const std::string& figure) {
  if (figure != "fig2" && figure != "fig4" && figure != "fig5")
    throw ConfigError("unknown figure '" + figure + "' (expected fig2, fig4 or fig5)");
  return fs::path(AFC_PRESET_DIR) / (figure + ".json");
}

int execute(const std::string& command, const CommandOptions& options, std::ostream& out, std::ostream& err,
            const std::string& figure) {
  std::ostream* log = options.quiet ? nullptr : &out;
  if (options.quiet) set_warning_sink([](const std::string&) {});
  try {
    const std::string path = command == "repro" && options.config_path.empty() ? preset_path(figure).string()
                                                                                : options.config_path;
    if (path.empty()) throw ConfigError("--config is required for '" + command + "'");
    RunConfig config = load_config(path);
    if (options.seed) config.seed = *options.seed;
    if (options.out_dir) config.output_dir = *options.out_dir;

    RunContext ctx(config, config.output_dir, command == "repro" ? "repro " + figure : command, log);
    std::string kind = command;
    if (command == "repro") kind = config.experiment.kind;
    if (kind == "comb") {
      run_comb(ctx);
    } else if (kind == "store") {
      run_store(ctx);
    } else if (kind == "spinwave") {
      run_spinwave(ctx);
    } else if (kind == "t2") {
      run_t2(ctx);
    } else if (kind == "fringe") {
      run_fringe(ctx);
    } else if (kind == "sweep") {
      run_sweep(ctx);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    ctx.finish();
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputation;
  }
}

}  // namespace afc::cli
