#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace afc::cli;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("afc-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& doc) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  int run(const std::string& command, const fs::path& config, const fs::path& out, std::string* err_text = nullptr,
          const std::string& figure = {}) const {
    CommandOptions o;
    o.config_path = config.string();
    o.out_dir = out.string();
    o.quiet = true;
    std::ostringstream out_stream, err_stream;
    const int code = execute(command, o, out_stream, err_stream, figure);
    if (err_text) *err_text = err_stream.str();
    return code;
  }

  static json read_json(const fs::path& p) {
    std::ifstream is(p);
    return json::parse(is);
  }

  static json preset(const std::string& name) { return read_json(fs::path(AFC_PRESET_DIR) / (name + ".json")); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, MissingSectionIsValidationError) {
  json doc = preset("store");
  doc.erase("grid");
  std::string err;
  EXPECT_EQ(run("store", write_config("c.json", doc), dir_ / "out", &err), kValidation);
  EXPECT_NE(err.find("grid"), std::string::npos) << err;
}

TEST_F(Cli, UnknownKeyRejected) {
  json doc = preset("comb");
  doc["comb"]["fineness"] = 4;
  std::string err;
  EXPECT_EQ(run("comb", write_config("c.json", doc), dir_ / "out", &err), kValidation);
  EXPECT_NE(err.find("fineness"), std::string::npos) << err;
  EXPECT_THROW(parse_config(doc), afc::ConfigError);
}

TEST_F(Cli, ConflictingGridKeysRejected) {
  json doc = preset("comb");
  doc["grid"]["span_mhz"] = 8.0;
  EXPECT_THROW(parse_config(doc), afc::ConfigError);
}

TEST_F(Cli, WrongKindForCommand) {
  EXPECT_EQ(run("t2", fs::path(AFC_PRESET_DIR) / "store.json", dir_ / "out"), kValidation);
}

TEST_F(Cli, ConfigRoundTripForAllPresets) {
  for (const auto& entry : fs::directory_iterator(AFC_PRESET_DIR)) {
    const json doc = read_json(entry.path());
    const json once = to_json(parse_config(doc));
    const json twice = to_json(parse_config(once));
    EXPECT_EQ(once, twice) << entry.path();
  }
}

TEST_F(Cli, DeterministicOutputs) {
  const fs::path cfg = fs::path(AFC_PRESET_DIR) / "fig4.json";
  ASSERT_EQ(run("spinwave", cfg, dir_ / "a"), kOk);
  ASSERT_EQ(run("spinwave", cfg, dir_ / "b"), kOk);
  const json a = read_json(dir_ / "a" / "manifest.json"), b = read_json(dir_ / "b" / "manifest.json");
  ASSERT_FALSE(a["files"].empty());
  EXPECT_EQ(a["files"], b["files"]);
  for (const auto& f : a["files"])
    EXPECT_EQ(sha256_file(dir_ / "a" / f["name"].get<std::string>()), f["sha256"].get<std::string>());
}

TEST_F(Cli, SeedOverrideChangesNoisyOutput) {
  CommandOptions o;
  o.config_path = (fs::path(AFC_PRESET_DIR) / "fig5.json").string();
  o.quiet = true;
  std::ostringstream sink;
  o.out_dir = (dir_ / "s1").string();
  o.seed = 1;
  ASSERT_EQ(execute("fringe", o, sink, sink), kOk);
  o.out_dir = (dir_ / "s2").string();
  o.seed = 2;
  ASSERT_EQ(execute("fringe", o, sink, sink), kOk);
  EXPECT_NE(sha256_file(dir_ / "s1" / "fringe.tsv"), sha256_file(dir_ / "s2" / "fringe.tsv"));
  EXPECT_EQ(read_json(dir_ / "s2" / "manifest.json")["seed"], 2);
}

TEST_F(Cli, NoiselessT2) {
  ASSERT_EQ(run("t2", fs::path(AFC_PRESET_DIR) / "t2.json", dir_ / "out"), kOk);
  const json r = read_json(dir_ / "out" / "result.json");
  EXPECT_NEAR(r["fits"]["waveguide"]["derived_constant"].get<double>(), 124.0, 1e-9);
}

TEST_F(Cli, SpinwaveTotalTime) {
  ASSERT_EQ(run("spinwave", fs::path(AFC_PRESET_DIR) / "spinwave.json", dir_ / "out"), kOk);
  const json r = read_json(dir_ / "out" / "result.json");
  EXPECT_EQ(r["spin_wave"]["t_total_us"].get<double>(), 10.5);
  EXPECT_NEAR(r["spin_wave"]["echo_time_us"].get<double>(), 10.5, 0.05);
}

TEST_F(Cli, FringeVisibilityWithinError) {
  ASSERT_EQ(run("fringe", fs::path(AFC_PRESET_DIR) / "fig5.json", dir_ / "out"), kOk);
  const json fit = read_json(dir_ / "out" / "result.json")["fit"];
  EXPECT_NEAR(fit["visibility"].get<double>(), 0.95, 3.0 * fit["stderr_visibility"].get<double>());
}

TEST_F(Cli, ReproFig2EmitsThreeTables) {
  std::string err;
  ASSERT_EQ(run("repro", {}, dir_ / "out", &err, "fig2"), kOk) << err;
  for (const char* label : {"waveguide", "bulk1", "bulk2"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string("t2_") + label + ".tsv"))) << label;
}

TEST_F(Cli, BinaryUsageErrors) {
  const std::string bin = AFC_BINARY;
  const auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(""), kUsage);
  EXPECT_EQ(status("frobnicate"), kUsage);
  EXPECT_EQ(status("store"), kUsage);
  EXPECT_EQ(status("repro fig9"), kUsage);
  EXPECT_EQ(status("--version"), kOk);
  EXPECT_EQ(status("comb --config " + (fs::path(AFC_PRESET_DIR) / "comb.json").string() + " --out " +
                   (dir_ / "bin").string() + " --quiet"),
            kOk);
}
