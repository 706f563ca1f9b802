#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eventlens/error.hpp"
#include "eventlens/pipeline.hpp"
#include "eventlens/report.hpp"
#include "eventlens/synth.hpp"
#include "helpers.hpp"

using namespace eventlens;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliResult {
  int status;
  std::string output;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(EVENTLENS_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(log)};
}

/// Writes a synthetic dataset and its run.json into `dir`; returns the config path.
std::filesystem::path synth_fixture(const std::filesystem::path& dir, std::uint64_t seed) {
  DgpSpec spec;
  spec.seed = seed;
  spec.planted_event_alpha = 0.004;
  spec.spillover = {2, 0.6};
  const SynthPanel data = generate(spec);
  write_synth(data, dir);
  const Json cfg{{"data", {{"prices", "prices.csv"}, {"factors", "factors.csv"}}},
                 {"portfolios", {{"treatment", data.truth.treated_assets}, {"control", data.truth.control_assets}}},
                 {"event", {{"date", data.truth.event_date.iso()}}},
                 {"psm", {{"n_boot", 200}}},
                 {"placebo", {{"n", 20}}},
                 {"seed", seed},
                 {"out", "results"}};
  spit(dir / "run.json", cfg.dump(2));
  return dir / "run.json";
}

}  // namespace

TEST(Config, DefaultsAndPaths) {
  const RunConfig c = parse_config(Json::parse(R"({"data": {"prices": "p.csv"}, "event": {"date": "2020-03-02"}})"),
                                   "/base");
  EXPECT_EQ(c.prices, std::filesystem::path("/base/p.csv"));
  EXPECT_FALSE(c.factors.has_value());
  EXPECT_EQ(c.models.size(), 3u);
  EXPECT_EQ(c.event.estimation_len, 60);
  EXPECT_EQ(c.event.event_len, 30);
  EXPECT_FALSE(c.var.p.has_value());
  EXPECT_EQ(c.var.horizon, 10);
  EXPECT_EQ(c.placebo.n, 100);
  EXPECT_EQ(c.psm.n_boot, 1000);
  const Json resolved = resolved_json(c);
  EXPECT_EQ(resolved["var"]["p"], "auto");
  EXPECT_EQ(resolved["t_convention"], "prediction-adjusted");
  EXPECT_EQ(resolved["psm"]["caliper_scale"], "logit");
}

TEST(Config, RejectsUnknownAndBadValues) {
  EXPECT_THROW(parse_config(Json::parse(R"({"dta": {}})"), "."), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"var": {"lags": 2}})"), "."), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"models": ["capm", "apt"]})"), "."), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"var": {"p": 0}})"), "."), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"event": {"date": "2020-02-30"}})"), "."), ParseError);
  EXPECT_THROW(parse_config(Json::parse(R"({"placebo": {"alpha": 1.5}})"), "."), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"seed": "x"})"), "."), ValidationError);
}

TEST(Pipeline, AllEqualsUnionOfSubcommands) {
  const auto dir = testutil::fresh_dir("union");
  RunConfig cfg = load_config(synth_fixture(dir, 5));
  cfg.out_dir = dir / "all";
  const auto all = run_subcommand("all", cfg);
  for (const char* name : {"event_study.json", "event_paths.csv", "granger_scan.json", "irf.csv", "irf.json", "ccf.csv",
                           "att.json", "balance.csv", "matched_pairs.csv", "placebo.json", "var.json",
                           "run_manifest.json"}) {
    EXPECT_NE(std::find(all.begin(), all.end(), name), all.end()) << name;
  }
  std::size_t covered = 0;
  for (const char* sub : {"event-study", "var", "granger", "irf", "ccf", "psm", "placebo"}) {
    cfg.out_dir = dir / sub;
    for (const auto& f : run_subcommand(sub, cfg)) {
      if (f == "run_manifest.json") continue;
      EXPECT_EQ(slurp(dir / sub / f), slurp(dir / "all" / f)) << sub << '/' << f;
      ++covered;
    }
  }
  EXPECT_EQ(covered + 1, all.size());
}

TEST(Pipeline, EveryJsonEmbedsConfigAndSeed) {
  const auto dir = testutil::fresh_dir("provenance");
  RunConfig cfg = load_config(synth_fixture(dir, 6));
  const auto files = run_subcommand("all", cfg);
  const Json expected = resolved_json(cfg);
  for (const auto& f : files) {
    if (std::filesystem::path(f).extension() != ".json") continue;
    const Json j = Json::parse(slurp(cfg.out_dir / f));
    EXPECT_EQ(j["config"], expected) << f;
    EXPECT_EQ(j["seed"], 6) << f;
  }
}

TEST(Pipeline, PlantedEffectsVisible) {
  const auto dir = testutil::fresh_dir("planted");
  RunConfig cfg = load_config(synth_fixture(dir, 7));
  run_subcommand("all", cfg);
  const Json es = Json::parse(slurp(cfg.out_dir / "event_study.json"));
  EXPECT_EQ(es["results"][0]["portfolio"], "treatment");
  EXPECT_LT(es["results"][0]["p_value"].get<double>(), 0.05);
  const Json g = Json::parse(slurp(cfg.out_dir / "granger_scan.json"));
  EXPECT_LT(g["scan"]["rows"][1]["treatment_to_control"]["p_value"].get<double>(), 0.05);
  const Json irf = Json::parse(slurp(cfg.out_dir / "irf.json"));
  EXPECT_EQ(irf["irf"]["theta"][0][0][1].get<double>(), 0.0);
}

TEST(Pipeline, PsmPreWindowAndBankDay) {
  const auto dir = testutil::fresh_dir("psm_modes");
  RunConfig cfg = load_config(synth_fixture(dir, 8));
  cfg.psm.window = UnitWindow::Pre;
  cfg.psm.mode = UnitMode::BankDay;
  const auto files = run_subcommand("psm", cfg);
  const Json att = Json::parse(slurp(cfg.out_dir / "att.json"));
  EXPECT_EQ(att["matching"]["n_treated"], 3 * 60);
  EXPECT_EQ(att["config"]["psm"]["window"], "pre");
}

TEST(Cli, ExitCodes) {
  const auto dir = testutil::fresh_dir("cli_exit");
  const auto cfg_path = synth_fixture(dir, 9);
  const auto log = dir / "log.txt";

  EXPECT_EQ(run_cli("frobnicate --config " + cfg_path.string(), log).status, 64);
  EXPECT_EQ(run_cli("all --config " + cfg_path.string() + " --bogus", log).status, 64);
  EXPECT_EQ(run_cli("all", log).status, 64);

  spit(dir / "bad.json", R"({"portfolios": {"treatment": ["T1"]}, "mystery": 1})");
  const CliResult bad = run_cli("event-study --config " + (dir / "bad.json").string(), log);
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("mystery"), std::string::npos) << bad.output;

  Json cfg = Json::parse(slurp(cfg_path));
  cfg["data"].erase("factors");
  cfg["models"] = {"fama-french-3"};
  spit(dir / "nofactors.json", cfg.dump());
  const CliResult nf = run_cli("event-study --config " + (dir / "nofactors.json").string(), log);
  EXPECT_EQ(nf.status, 2);
  EXPECT_NE(nf.output.find("smb"), std::string::npos) << nf.output;
  EXPECT_NE(nf.output.find("hml"), std::string::npos) << nf.output;

  spit(dir / "f3.csv", "date,mkt,rf\n2015-01-06,0.01,0.0\n");
  cfg["data"]["factors"] = "f3.csv";
  spit(dir / "partial.json", cfg.dump());
  const CliResult partial = run_cli("event-study --config " + (dir / "partial.json").string(), log);
  EXPECT_EQ(partial.status, 2);
  EXPECT_NE(partial.output.find("smb, hml"), std::string::npos) << partial.output;
}

TEST(Cli, ByteIdenticalReruns) {
  const auto dir = testutil::fresh_dir("cli_repeat");
  const auto cfg_path = synth_fixture(dir, 10);
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_cli("all --config " + cfg_path.string() + " --out " + (dir / "a").string(), log).status, 0);
  ASSERT_EQ(run_cli("all --config " + cfg_path.string() + " --out " + (dir / "b").string(), log).status, 0);
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 12u);
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto dir = testutil::fresh_dir("cli_seed");
  const auto cfg_path = synth_fixture(dir, 11);
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_cli("placebo --config " + cfg_path.string() + " --seed 99 --out " + (dir / "o").string(), log).status, 0);
  const Json j = Json::parse(slurp(dir / "o" / "placebo.json"));
  EXPECT_EQ(j["seed"], 99);
  EXPECT_EQ(j["config"]["seed"], 99);
}

TEST(Cli, SynthThenAll) {
  const auto dir = testutil::fresh_dir("cli_synth");
  spit(dir / "synth.json", R"({"synth": {"planted_event_alpha": 0.004, "spillover": {"lag": 2, "coefficient": 0.6}}, "seed": 3, "out": "data"})");
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_cli("synth --config " + (dir / "synth.json").string(), log).status, 0);
  for (const char* f : {"prices.csv", "factors.csv", "ground_truth.json", "run.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "data" / f)) << f;
  }
  const CliResult r = run_cli("all --config " + (dir / "data" / "run.json").string(), log);
  ASSERT_EQ(r.status, 0) << r.output;
  for (const char* f : {"event_study.json", "granger_scan.json", "irf.csv", "ccf.csv", "att.json", "balance.csv",
                        "placebo.json", "run_manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "data" / "results" / f)) << f;
  }
}
