#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <ccbf/cli.hpp>
#include <ccbf/config.hpp>
#include <ccbf/result_io.hpp>

using namespace ccbf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ccbf_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

ResultTable table_at(const fs::path& p) {
  std::ifstream f(p);
  return read_result_csv(f);
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(RunOptions opts) {
  std::ostringstream o;
  std::ostringstream e;
  const int code = cmd_run(opts, o, e);
  return {code, o.str(), e.str()};
}

RunOptions short_run(const fs::path& dir) {
  RunOptions o;
  o.source = "paper_sis3";
  o.out = dir.string();
  o.t_final = 10.0;
  return o;
}

}  // namespace

TEST_CASE("run writes the result schema") {
  auto dir = scratch("schema");
  auto r = run(short_run(dir));
  REQUIRE(r.code == kExitOk);
  auto table = table_at(dir / "result.csv");
  CHECK(table.nodes == 3);
  CHECK(table.header == result_columns(3));
  CHECK(table.rows.size() == 1001);
  CHECK(table.header[1] == "x_1");
  CHECK(table.header[4] == "u_1");
  CHECK(fs::exists(dir / "meta.json"));
  CHECK_FALSE(fs::exists(dir / "messages.csv"));
}

TEST_CASE("no-collab run shows node 1 violating") {
  auto dir = scratch("nocollab");
  auto opts = short_run(dir);
  opts.t_final.reset();
  opts.no_collab = true;
  REQUIRE(run(opts).code == kExitOk);
  auto table = table_at(dir / "result.csv");
  const auto viol = table.values("viol_1");
  CHECK(*std::min_element(viol.begin(), viol.end()) < 0.0);
  CHECK(table.header == result_columns(3));
}

TEST_CASE("broken scenario exits nonzero with errors on stderr") {
  auto dir = scratch("broken");
  std::ofstream(dir / "broken.cfg") << "[graph]\nnodes = 3\n[model]\nkind = sis\n";
  RunOptions o;
  o.source = (dir / "broken.cfg").string();
  o.out = (dir / "out").string();
  auto r = run(o);
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("model.gamma") != std::string::npos);
  CHECK(r.err.find("graph.edges") != std::string::npos);
  RunOptions missing;
  missing.source = (dir / "absent.cfg").string();
  CHECK(run(missing).code == kExitIo);
}

TEST_CASE("plot counts") {
  auto dir = scratch("plot");
  auto opts = short_run(dir);
  REQUIRE(run(opts).code == kExitOk);
  std::ostringstream o;
  std::ostringstream e;
  REQUIRE(cmd_plot((dir / "result.csv").string(), (dir / "plot.svg").string(), std::nullopt, o, e) == kExitOk);
  const auto svg = slurp(dir / "plot.svg");
  CHECK(count(svg, "<polyline class=\"trace\"") == 6);
  CHECK(count(svg, "<line class=\"threshold\"") == 3);
  CHECK(count(svg, "<line class=\"limit\"") == 1);
  CHECK(count(svg, "stroke-dasharray=\"2,4\"") == 3);
}

TEST_CASE("plot edge cases") {
  auto dir = scratch("plot_edge");
  const auto header = result_columns(3);
  std::string head;
  for (std::size_t k = 0; k < header.size(); ++k) head += (k ? "," : "") + header[k];
  std::ofstream(dir / "empty.csv") << head << "\n";
  std::ostringstream o;
  std::ostringstream e;
  CHECK(cmd_plot((dir / "empty.csv").string(), (dir / "empty.svg").string(), std::string("paper_sis3"), o, e) ==
        kExitUsage);
  CHECK(e.str().find("no rows") != std::string::npos);

  std::string row = "0";
  for (std::size_t k = 1; k < header.size(); ++k) row += ",0";
  std::ofstream(dir / "one.csv") << head << "\n" << row << "\n";
  std::ostringstream e2;
  REQUIRE(cmd_plot((dir / "one.csv").string(), (dir / "one.svg").string(), std::string("paper_sis3"), o, e2) ==
          kExitOk);
  const auto svg = slurp(dir / "one.svg");
  CHECK(count(svg, "<circle") == 6);
  CHECK(count(svg, "<polyline class=\"trace\"") == 0);

  std::ofstream(dir / "bad.csv") << "t,x_1,u_1,cbar_1,outer_rounds,inner_rounds,viol_1\n0,abc,0,0,0,0,0\n";
  std::ostringstream e3;
  CHECK(cmd_plot((dir / "bad.csv").string(), (dir / "bad.svg").string(), std::nullopt, o, e3) == kExitUsage);
  CHECK(e3.str().find("x_1") != std::string::npos);
}

TEST_CASE("manifest reproduces the run") {
  auto dir = scratch("manifest");
  auto opts = short_run(dir / "first");
  opts.trace = true;
  opts.set = {"barrier.kappa=2"};
  REQUIRE(run(opts).code == kExitOk);
  RunOptions again;
  again.source = (dir / "first" / "meta.json").string();
  again.out = (dir / "second").string();
  again.trace = true;
  REQUIRE(run(again).code == kExitOk);
  CHECK(slurp(dir / "first" / "result.csv") == slurp(dir / "second" / "result.csv"));
  CHECK(slurp(dir / "first" / "messages.csv") == slurp(dir / "second" / "messages.csv"));
  const auto meta = slurp(dir / "first" / "meta.json");
  CHECK(meta.find("\"max_conservation_error\"") != std::string::npos);
  CHECK(meta.find("kappa = [2, 2, 2]") != std::string::npos);
}

TEST_CASE("message log format") {
  auto dir = scratch("messages");
  auto opts = short_run(dir);
  opts.trace = true;
  REQUIRE(run(opts).code == kExitOk);
  std::ifstream f(dir / "messages.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "sim_time,sub_round,kind,from,to,value");
  const std::regex row(R"(^[0-9.e+-]+,[0-9]+,(request|adjustment),[1-3],[1-3],[-0-9.e+]+$)");
  int rows = 0;
  while (std::getline(f, line)) {
    CHECK(std::regex_match(line, row));
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("terminal infeasibility exit code") {
  auto dir = scratch("infeasible");
  RunOptions o = short_run(dir);
  o.set = {"model.u_max=1e-9", "sim.x0=[0.3, 0.3, 0.3]"};
  auto r = run(o);
  CHECK(r.code == kExitInfeasible);
  o.continue_on_infeasible = true;
  o.t_final = 0.5;
  CHECK(run(o).code == kExitOk);
}

TEST_CASE("validate prints the normalized scenario") {
  std::ostringstream o;
  std::ostringstream e;
  CHECK(cmd_validate("paper_sis3", o, e) == kExitOk);
  CHECK(o.str() == normalize(load_config("paper_sis3")));
}

TEST_CASE("sweep runs the cartesian product") {
  auto dir = scratch("sweep");
  SweepOptions s;
  s.base = short_run(dir);
  s.base.t_final = 2.0;
  s.axes = {"barrier.eta=1,3", "barrier.kappa=1,2,4"};
  s.jobs = 3;
  std::ostringstream o;
  std::ostringstream e;
  REQUIRE(cmd_sweep(s, o, e) == kExitOk);
  std::ifstream idx(dir / "sweep.csv");
  std::string line;
  std::getline(idx, line);
  CHECK(line == "run,dir,barrier.eta,barrier.kappa,exit_code");
  int rows = 0;
  while (std::getline(idx, line)) {
    ++rows;
    CHECK(line.substr(line.size() - 2) == ",0");
  }
  CHECK(rows == 6);
  int dirs = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) {
      ++dirs;
      CHECK(fs::exists(entry.path() / "result.csv"));
    }
  CHECK(dirs == 6);
}
