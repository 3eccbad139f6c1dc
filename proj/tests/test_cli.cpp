#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "fedac/cli.hpp"
#include "fedac/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = fedac::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("fedac_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path &p, const std::string &text) { std::ofstream(p) << text; }

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::regex error_line(R"(^error: (usage|data|numerical|verification): [^\n]+\n$)");

const char *small_config = R"(objective = quadratic
quad_dim = 3
quad_sigma = 0.5
T = 16
K = 1, 4
M = 2
eta = 0.05, 0.2
seeds = 1, 2
eval_every = 4
algorithms = fedac1, fedavg
)";

} // namespace

TEST_CASE("no arguments prints usage and fails") {
  const Outcome o = cli({});
  CHECK(o.code == 1);
  CHECK(o.out.find("Usage") != std::string::npos);
  CHECK(std::regex_match(o.err, error_line));
}

TEST_CASE("unknown flags and subcommands are usage errors") {
  for (const auto &args : std::vector<std::vector<std::string>>{
           {"bogus"}, {"instability", "--kapa", "25"}, {"run", "--M", "many"},
           {"norm-bounds", "--samples", "1"}, {"instability", "--K", "-1"}}) {
    const Outcome o = cli(args);
    CHECK(o.code == 1);
    CHECK(std::regex_match(o.err, error_line));
    CHECK(o.err.rfind("error: usage: ", 0) == 0);
  }
}

TEST_CASE("check-data") {
  const fs::path dir = scratch("check");
  write(dir / "tiny.txt", "+1 1:1 3:2\n-1 2:0.5\n");
  const Outcome o = cli({"check-data", (dir / "tiny.txt").string()});
  CHECK(o.code == 0);
  CHECK(o.out.rfind("n=2 dim=3", 0) == 0);
  CHECK(cli({"check-data", (dir / "tiny.txt").string(), "--dim", "10"}).out.rfind("n=2 dim=10", 0) == 0);

  write(dir / "bad.txt", "+1 1:1\n+1 0:1\n");
  const Outcome bad = cli({"check-data", (dir / "bad.txt").string()});
  CHECK(bad.code == 2);
  CHECK(std::regex_match(bad.err, error_line));
  CHECK(bad.err.find("line 2") != std::string::npos);

  CHECK(cli({"check-data", (dir / "missing.txt").string()}).code == 2);
  CHECK(cli({"check-data", (dir / "tiny.txt").string(), "--dim", "2"}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("instability table") {
  const Outcome o = cli({"instability", "--kappa", "25", "--K", "4", "--eps", "1e-9"});
  CHECK(o.code == 0);
  std::istringstream lines(o.out);
  std::string line;
  int ratios = 0;
  const std::regex ratio_row(R"(^\s*(\d+)\s+(1\.02\d*)\b.*)");
  while (std::getline(lines, line)) {
    std::smatch m;
    if (std::regex_match(line, m, ratio_row)) {
      CHECK(std::abs(std::stod(m[2]) - 1.024) <= 1e-3);
      ++ratios;
    }
  }
  CHECK(ratios == 4);

  const Outcome too_big = cli({"instability", "--kappa", "25", "--K", "2", "--eps", "1"});
  CHECK(too_big.code == 1);
  CHECK(cli({"instability", "--kappa", "10"}).code == 1);
}

TEST_CASE("norm-bounds") {
  const Outcome o = cli({"norm-bounds", "--mu", "0.01", "--L", "1", "--samples", "11"});
  CHECK(o.code == 0);
  CHECK(o.out.find("violations=0") != std::string::npos);
}

TEST_CASE("verify passes without external data") {
  const Outcome o = cli({"verify", "--data-dir", "/nonexistent", "--deterministic-output"});
  CHECK(o.code == 0);
  CHECK(o.out.find("FAIL") == std::string::npos);
  CHECK(o.out.find("SKIP dataset-shapes") != std::string::npos);
  CHECK(o.out.find("SKIP speedup-ordering") != std::string::npos);
}

TEST_CASE("every flag in the help text is accepted") {
  const fs::path dir = scratch("flags");
  write(dir / "exp.cfg", small_config);
  write(dir / "tiny.txt", "+1 1:1\n");
  const std::string cfg = (dir / "exp.cfg").string(), out = (dir / "out").string();

  const std::map<std::string, std::map<std::string, std::vector<std::string>>> samples{
      {"check-data", {{"", {(dir / "tiny.txt").string()}}, {"--dim", {"4"}}}},
      {"run",
       {{"--config", {cfg}}, {"--out", {out}}, {"--set", {"T=8"}}, {"--algorithm", {"fedavg"}},
        {"--M", {"2"}}, {"--K", {"2"}}, {"--T", {"8"}}, {"--eval-every", {"4"}},
        {"--eta", {"0.1"}}, {"--seed", {"3"}}, {"--threads", {"2"}},
        {"--deterministic-output", {}}}},
      {"sweep",
       {{"--config", {cfg}}, {"--out", {out}}, {"--set", {"seeds=1"}}, {"--threads", {"2"}},
        {"--deterministic-output", {}}}},
      {"instability",
       {{"--kappa", {"25"}}, {"--K", {"2"}}, {"--eps", {"1e-9"}}, {"--threads", {"1"}},
        {"--deterministic-output", {}}}},
      {"norm-bounds",
       {{"--mu", {"0.1"}}, {"--L", {"10"}}, {"--samples", {"5"}}, {"--threads", {"1"}},
        {"--deterministic-output", {}}}},
      {"verify", {{"--data-dir", {"/nonexistent"}}, {"--threads", {"2"}}, {"--deterministic-output", {}}}},
  };

  const std::string top = cli({"--help"}).out;
  for (const auto &[sub, flags] : samples) {
    CAPTURE(sub);
    CHECK(top.find(sub) != std::string::npos);
    const Outcome help = cli({sub, "--help"});
    REQUIRE(help.code == 0);
    std::set<std::string> listed;
    const std::regex flag(R"(--[a-z][a-z-]*|--[A-Z]\b)");
    for (auto it = std::sregex_iterator(help.out.begin(), help.out.end(), flag);
         it != std::sregex_iterator(); ++it)
      if (it->str() != "--help")
        listed.insert(it->str());
    std::set<std::string> known;
    for (const auto &[name, _] : flags)
      if (!name.empty())
        known.insert(name);
    CHECK(listed == known);

    std::vector<std::string> args{sub};
    for (const auto &[name, values] : flags) {
      if (!name.empty())
        args.push_back(name);
      args.insert(args.end(), values.begin(), values.end());
    }
    const Outcome o = cli(args);
    CAPTURE(o.err);
    CHECK(o.code == 0);
  }
  CHECK(fs::exists(dir / "out" / "records.csv"));
  CHECK(fs::exists(dir / "out" / "sweep.json"));
  fs::remove_all(dir);
}

TEST_CASE("run and sweep outputs") {
  const fs::path dir = scratch("outputs");
  write(dir / "exp.cfg", small_config);
  const std::string cfg = (dir / "exp.cfg").string();

  const Outcome r = cli({"run", "--config", cfg, "--out", (dir / "run").string(), "--K", "4",
                         "--deterministic-output"});
  REQUIRE(r.code == 0);
  const auto records = fedac::parse_records_csv(slurp(dir / "run" / "records.csv"));
  CHECK(records.size() == 5);
  CHECK(fedac::parse_records_json(slurp(dir / "run" / "records.json")) == records);
  CHECK(records.front().K == 4);

  const Outcome s1 = cli({"sweep", "--config", cfg, "--out", (dir / "s1").string(),
                          "--threads", "1", "--deterministic-output"});
  const Outcome s2 = cli({"sweep", "--config", cfg, "--out", (dir / "s2").string(),
                          "--threads", "8", "--deterministic-output"});
  REQUIRE(s1.code == 0);
  REQUIRE(s2.code == 0);
  for (const char *f : {"sweep.csv", "sweep.json", "records.csv", "records.json"})
    CHECK(slurp(dir / "s1" / f) == slurp(dir / "s2" / f));
  CHECK(fedac::parse_sweep_csv(slurp(dir / "s1" / "sweep.csv")).size() == 4);
  CHECK(s1.out.find("elapsed") == std::string::npos);

  const Outcome timed = cli({"sweep", "--config", cfg, "--out", (dir / "s3").string()});
  CHECK(timed.out.find("elapsed") != std::string::npos);

  const Outcome bad = cli({"run", "--config", cfg, "--set", "K=5", "--out", (dir / "x").string()});
  CHECK(bad.code == 1);
  CHECK(std::regex_match(bad.err, error_line));
  CHECK(cli({"run", "--config", (dir / "none.cfg").string()}).code == 1);
  CHECK(cli({"run", "--config", cfg, "--set", "nonsense"}).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("identical invocations print identical output") {
  const std::vector<std::string> inst{"instability", "--kappa", "36", "--K", "3", "--deterministic-output"};
  CHECK(cli(inst).out == cli(inst).out);
  const std::vector<std::string> nb{"norm-bounds", "--mu", "0.1", "--L", "3", "--deterministic-output"};
  const Outcome a = cli(nb);
  std::vector<std::string> nb8 = nb;
  nb8.insert(nb8.end(), {"--threads", "8"});
  CHECK(a.out == cli(nb).out);
  CHECK(a.out == cli(nb8).out);
}

TEST_CASE("output directory precedence") {
  const fs::path dir = scratch("precedence");
  std::string cfg_text = small_config;
  cfg_text += "out_dir = " + (dir / "from_config").string() + "\n";
  write(dir / "exp.cfg", cfg_text);
  const std::string cfg = (dir / "exp.cfg").string();
  const std::vector<std::string> base{"run", "--config", cfg, "--deterministic-output"};

  ::unsetenv("FEDAC_OUT_DIR");
  REQUIRE(cli(base).code == 0);
  CHECK(fs::exists(dir / "from_config" / "records.csv"));

  ::setenv("FEDAC_OUT_DIR", (dir / "from_env").string().c_str(), 1);
  REQUIRE(cli(base).code == 0);
  CHECK(fs::exists(dir / "from_env" / "records.csv"));

  std::vector<std::string> flagged = base;
  flagged.insert(flagged.end(), {"--out", (dir / "from_flag").string()});
  REQUIRE(cli(flagged).code == 0);
  CHECK(fs::exists(dir / "from_flag" / "records.csv"));
  ::unsetenv("FEDAC_OUT_DIR");
  fs::remove_all(dir);
}
