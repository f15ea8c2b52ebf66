#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "extrapolmv/cli.hpp"
#include "extrapolmv/csv.hpp"
#include "test_util.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

using namespace extrapolmv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// simulate + fit into `dir`; returns the fit exit code.
int prepare(const testutil::TempDir& dir, const std::string& seed = "3", const std::string& iters = "400") {
  spit(dir / "gen.json",
       R"({"generator": {"l": 150, "n": 3, "q": 4, "missing_prob": 0.15, "unobserved_prob": 0.1,
           "planted_high_leverage": 3}, "model": {"burn_in": 200}})");
  const Run sim = run({"simulate", "--spec", (dir / "gen.json").string(), "--seed", seed, "--out", (dir / "sim").string()});
  REQUIRE(sim.code == 0);
  const Run fit = run({"fit", "--data", (dir / "sim/data.csv").string(), "--config", (dir / "sim/config.json").string(),
                       "--iters", iters, "--burnin", "200", "--out", (dir / "fit").string()});
  return fit.code;
}

std::vector<std::string> score_args(const testutil::TempDir& dir, const std::string& out) {
  return {"score", "--draws", (dir / "fit").string(), "--data", (dir / "sim/data.csv").string(), "--config",
          (dir / "sim/config.json").string(), "--out", (dir / out).string()};
}

long count_flags(const csv::Table& t, const std::string& column) {
  const std::size_t c = t.require_column(column);
  long n = 0;
  for (const auto& row : t.rows) n += row[c] == "1";
  return n;
}

}  // namespace

TEST_CASE("help, version and usage errors") {
  CHECK(run({"--version"}).code == kExitOk);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({}).code == kExitError);
  CHECK(run({"fit"}).code == kExitError);
  CHECK(run({"frobnicate"}).code == kExitError);
}

TEST_CASE("fit rejects burn-in beyond the iteration count") {
  testutil::TempDir dir("cli-burn");
  CHECK(prepare(dir) == kExitOk);
  const Run r = run({"fit", "--data", (dir / "sim/data.csv").string(), "--config", (dir / "sim/config.json").string(),
                     "--iters", "10", "--burnin", "20", "--out", (dir / "bad").string()});
  CHECK(r.code == kExitError);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("fit writes draws, diagnostics and a manifest") {
  testutil::TempDir dir("cli-fit");
  CHECK(prepare(dir) == kExitOk);
  for (const char* f : {"draws.csv", "meta.json", "convergence.json", "manifest.json"}) CHECK(fs::exists(dir / "fit" / f));
  const auto m = nlohmann::json::parse(slurp(dir / "fit/manifest.json"));
  CHECK(m["command"] == "fit");
  CHECK(m["seed"] == 3);
  CHECK(m["version"] == kVersion);
  CHECK(m["dataset_hash"].get<std::string>().size() > 0);
  const std::string args = m["args"].dump();
  CHECK(args.find("--out") == std::string::npos);
}

TEST_CASE("same seed gives byte-identical outputs for every command") {
  testutil::TempDir a("cli-det-a"), b("cli-det-b");
  REQUIRE(prepare(a) == kExitOk);
  REQUIRE(prepare(b) == kExitOk);
  CHECK(slurp(a / "sim/data.csv") == slurp(b / "sim/data.csv"));
  CHECK(slurp(a / "fit/draws.csv") == slurp(b / "fit/draws.csv"));
  CHECK(slurp(a / "fit/manifest.json") != "");
  REQUIRE(run(score_args(a, "score")).code == kExitOk);
  REQUIRE(run(score_args(b, "score")).code == kExitOk);
  CHECK(slurp(a / "score/scores.csv") == slurp(b / "score/scores.csv"));
  for (auto* d : {&a, &b}) {
    REQUIRE(run({"tree", "--scores", (*d / "score/scores.csv").string(), "--data", (*d / "sim/data.csv").string(),
                 "--config", (*d / "sim/config.json").string(), "--min-leaf", "5", "--out", (*d / "tree").string()})
                .code == kExitOk);
  }
  CHECK(slurp(a / "tree/tree.json") == slurp(b / "tree/tree.json"));

  testutil::TempDir c("cli-det-c");
  REQUIRE(prepare(c, "4") == kExitOk);
  CHECK(slurp(a / "fit/draws.csv") != slurp(c / "fit/draws.csv"));
}

TEST_CASE("score covers both measures and all default cutoffs in one pass") {
  testutil::TempDir dir("cli-score");
  REQUIRE(prepare(dir) == kExitOk);
  REQUIRE(run(score_args(dir, "score")).code == kExitOk);
  const csv::Table t = csv::read_file(dir / "score/scores.csv");
  CHECK(t.rows.size() == 150);
  for (const char* c : {"mvpv_tr", "mvpv_logdet", "e_max", "e_lev", "e_q99", "e_q95", "trace_e_max", "trace_e_q95",
                        "first_flagging_cutoff", "trace_first_flagging_cutoff"})
    CHECK(t.column(c).has_value());
  CHECK(count_flags(t, "e_max") <= count_flags(t, "e_q99"));
  CHECK(count_flags(t, "e_q99") <= count_flags(t, "e_q95"));
  CHECK(count_flags(t, "e_max") <= count_flags(t, "e_lev"));
  CHECK(fs::exists(dir / "score/plotdata.csv"));
  const auto m = nlohmann::json::parse(slurp(dir / "score/manifest.json"));
  CHECK(m["measures"] == nlohmann::json::array({"det", "trace"}));

  auto args = score_args(dir, "score2");
  args.insert(args.end(), {"--measure", "cmvpv:y2", "--cutoffs", "max,q:0.9", "--divisor", "A-1"});
  REQUIRE(run(args).code == kExitOk);
  const csv::Table t2 = csv::read_file(dir / "score2/scores.csv");
  CHECK(t2.column("cmvpv_y2").has_value());
  CHECK(t2.column("e_q90").has_value());
  CHECK_FALSE(t2.column("e_q95").has_value());

  auto bad = score_args(dir, "score3");
  bad.insert(bad.end(), {"--measure", "cmvpv:nope"});
  CHECK(run(bad).code == kExitError);
}

TEST_CASE("score refuses data that differs from the fitted data unless forced") {
  testutil::TempDir dir("cli-hash");
  REQUIRE(prepare(dir) == kExitOk);
  std::string data = slurp(dir / "sim/data.csv");
  // Replace the first row's x1 value.
  std::size_t start = data.find('\n') + 1;
  for (int k = 0; k < 3; ++k) start = data.find(',', start) + 1;
  data.replace(start, data.find(',', start) - start, "0.125");
  spit(dir / "other.csv", data);
  auto args = score_args(dir, "score");
  args[4] = (dir / "other.csv").string();
  const Run r = run(args);
  CHECK(r.code == kExitError);
  CHECK(r.err.find("hash") != std::string::npos);
  args.push_back("--force");
  CHECK(run(args).code == kExitOk);
}

TEST_CASE("tree on a constant label is a single leaf") {
  testutil::TempDir dir("cli-tree");
  REQUIRE(prepare(dir) == kExitOk);
  REQUIRE(run(score_args(dir, "score")).code == kExitOk);
  const Run r = run({"tree", "--scores", (dir / "score/scores.csv").string(), "--data", (dir / "sim/data.csv").string(),
                     "--config", (dir / "sim/config.json").string(), "--label", "e_max", "--out",
                     (dir / "tree").string()});
  const csv::Table t = csv::read_file(dir / "score/scores.csv");
  if (count_flags(t, "e_max") == 0) {
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("warning") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "tree/tree.json"));
    CHECK_FALSE(j.contains("left"));
  }
  CHECK(run({"tree", "--scores", (dir / "score/scores.csv").string(), "--data", (dir / "sim/data.csv").string(),
             "--config", (dir / "sim/config.json").string(), "--label", "no_such", "--out", (dir / "t2").string()})
            .code == kExitError);
}

TEST_CASE("report counts agree with the scores and the tree section is optional") {
  testutil::TempDir dir("cli-report");
  REQUIRE(prepare(dir) == kExitOk);
  REQUIRE(run(score_args(dir, "score")).code == kExitOk);
  REQUIRE(run({"tree", "--scores", (dir / "score/scores.csv").string(), "--data", (dir / "sim/data.csv").string(),
               "--config", (dir / "sim/config.json").string(), "--min-leaf", "5", "--out", (dir / "tree").string()})
              .code == kExitOk);
  REQUIRE(run({"report", "--scores", (dir / "score/scores.csv").string(), "--tree", (dir / "tree/tree.json").string(),
               "--out", (dir / "rep").string()})
              .code == kExitOk);
  const std::string md = slurp(dir / "rep/report.md");
  const csv::Table t = csv::read_file(dir / "score/scores.csv");
  const std::string row_q95 = "| det | q95 | ";
  const auto pos = md.find(row_q95);
  REQUIRE(pos != std::string::npos);
  const std::string line = md.substr(pos, md.find('\n', pos) - pos);
  std::vector<std::string> cells;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, '|');) {
    const auto b = cell.find_first_not_of(' '), e = cell.find_last_not_of(' ');
    if (b != std::string::npos) cells.push_back(cell.substr(b, e - b + 1));
  }
  REQUIRE(cells.size() == 6);
  CHECK(std::stol(cells[3]) == count_flags(t, "e_q95"));
  CHECK(std::stol(cells[4]) + std::stol(cells[5]) == std::stol(cells[3]));
  CHECK(md.find("| trace | max | ") != std::string::npos);
  CHECK(md.find("## Classification tree") != std::string::npos);

  const Run r = run({"report", "--scores", (dir / "score/scores.csv").string(), "--tree",
                     (dir / "missing.json").string(), "--out", (dir / "rep2").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(slurp(dir / "rep2/report.md").find("Classification tree") == std::string::npos);
}

TEST_CASE("fit defaults to 20000 iterations") {
  testutil::TempDir dir("cli-default");
  spit(dir / "gen.json", R"({"l": 40, "n": 2, "q": 3})");
  REQUIRE(run({"simulate", "--spec", (dir / "gen.json").string(), "--out", (dir / "sim").string()}).code == 0);
  const Run fit = run({"fit", "--data", (dir / "sim/data.csv").string(), "--config", (dir / "sim/config.json").string(),
                       "--out", (dir / "fit").string()});
  CHECK(fit.code != kExitError);
  const auto meta = nlohmann::json::parse(slurp(dir / "fit/meta.json"));
  CHECK(meta["spec"]["iterations"] == 20000);
  CHECK(meta["spec"]["burn_in"] == 10000);
  CHECK(meta["draws_per_chain"] == 10000);
}

TEST_CASE("malformed input reports the offending line") {
  testutil::TempDir dir("cli-bad");
  REQUIRE(prepare(dir) == kExitOk);
  std::string data = slurp(dir / "sim/data.csv");
  data += "broken\n";
  spit(dir / "bad.csv", data);
  const Run r = run({"fit", "--data", (dir / "bad.csv").string(), "--config", (dir / "sim/config.json").string(),
                     "--iters", "50", "--burnin", "10", "--out", (dir / "f").string()});
  CHECK(r.code == kExitError);
  CHECK(r.err.find("line") != std::string::npos);
}
