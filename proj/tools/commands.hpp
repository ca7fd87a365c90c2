#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace afc::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kComputation = 3,
  kIo = 74,
  kUsage = 64,
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

/// One emitted file, hashed once it is closed.
struct EmittedFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Collects the files of one run and writes manifest.json at the end.
class RunContext {
 public:
  RunContext(const RunConfig& config, std::filesystem::path out_dir, std::string command, std::ostream* log);

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }
  std::ostream* log() const { return log_; }

  /// Opens `name` for writing, calls `write(stream)` and records the hash.
  template <typename F>
  void emit(const std::string& name, F&& write);
  void emit_json(const std::string& name, const nlohmann::json& doc);

  void finish();

 private:
  void record(const std::string& name);

  RunConfig config_;
  std::filesystem::path out_dir_;
  std::string command_;
  std::ostream* log_;
  std::string started_;
  std::vector<EmittedFile> files_;
};

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

void run_comb(RunContext& ctx);
void run_store(RunContext& ctx);
void run_spinwave(RunContext& ctx);
void run_t2(RunContext& ctx);
void run_fringe(RunContext& ctx);
void run_sweep(RunContext& ctx);

/// Path of a built-in figure preset (fig2, fig4 or fig5).
std::filesystem::path preset_path(const std::string& figure);

/// Loads the config (or preset), applies overrides and dispatches. Returns the
/// process exit code; errors are reported on `err`.
int execute(const std::string& command, const CommandOptions& options, std::ostream& out, std::ostream& err,
            const std::string& figure = {});

template <typename F>
void RunContext::emit(const std::string& name, F&& write) {
  {
    std::ofstream os(out_dir_ / name, std::ios::binary);
    if (!os) throw std::filesystem::filesystem_error("cannot write", out_dir_ / name, std::error_code());
    write(os);
    if (!os) throw std::filesystem::filesystem_error("write failed", out_dir_ / name, std::error_code());
  }
  record(name);
}

}  // namespace afc::cli
