#include <doctest.h>

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include <ccbf/config.hpp>
#include <ccbf/errors.hpp>

using namespace ccbf;

namespace {

std::string bundled() { return std::string(bundled_scenario("paper_sis3")); }

std::string without_line(std::string text, std::string_view prefix) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) != 0) out += line + "\n";
  return out;
}

std::string replace_line(std::string text, std::string_view prefix, std::string_view with) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) out += (line.rfind(prefix, 0) == 0 ? std::string(with) : line) + "\n";
  return out;
}

bool mentions(const ConfigError& e, std::string_view path) {
  for (const auto& s : e.issues())
    if (s.find(path) != std::string::npos) return true;
  return false;
}

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST_CASE("bundled scenario contents") {
  auto c = parse_config(bundled());
  CHECK(c.nodes == 3);
  CHECK(c.edges.size() == 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(c.beta(i, j) == (i == j ? 0.5 : 0.25));
    CHECK(c.gamma(i) == 0.3);
    CHECK(c.u_max(i) == 0.75);
  }
  CHECK(c.threshold(0) == 0.1);
  CHECK(c.threshold(1) == 0.12);
  CHECK(c.threshold(2) == 0.18);
  CHECK(c.x0(0) == 0.04);
  CHECK(c.dt == 0.01);
  CHECK(c.t_final == 100.0);
  CHECK(bundled_scenarios() == std::vector<std::string>{"paper_sis3"});
  CHECK(bundled_scenario("nope").empty());
}

TEST_CASE("shipped scenario file matches the bundled copy") {
  std::ifstream f(std::string(CCBF_SOURCE_DIR) + "/scenarios/paper_sis3.cfg");
  REQUIRE(f);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == bundled());
  CHECK(load_config(std::string(CCBF_SOURCE_DIR) + "/scenarios/paper_sis3.cfg") == load_config("paper_sis3"));
  CHECK_THROWS_AS(load_config("/no/such/file.cfg"), IoError);
}

TEST_CASE("missing gamma is reported at its path") {
  try {
    parse_config(without_line(bundled(), "gamma"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "model.gamma"));
  }
}

TEST_CASE("zero time step is reported at its path") {
  try {
    parse_config(replace_line(bundled(), "dt", "dt = 0"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "sim.dt"));
  }
}

TEST_CASE("every problem is reported") {
  auto text = replace_line(bundled(), "dt", "dt = -1");
  text = replace_line(text, "x0", "x0 = [0.04, 2]");
  text = replace_line(text, "kind", "kind = sir");
  auto issues = issues_of(text + "\n[extra]\nfoo = 1\n");
  std::string all;
  for (const auto& s : issues) all += s + "\n";
  CHECK(all.find("sim.dt") != std::string::npos);
  CHECK(all.find("sim.x0") != std::string::npos);
  CHECK(all.find("model.kind") != std::string::npos);
  CHECK(all.find("extra") != std::string::npos);
}

TEST_CASE("semantic checks") {
  auto zero_beta = replace_line(bundled(), "  [0.5, 0.25, 0.25]", "  [0.5, 0, 0.25],");
  CHECK_FALSE(issues_of(zero_beta).empty());
  auto horizon = replace_line(bundled(), "t_final", "t_final = 0.005");
  CHECK_FALSE(issues_of(horizon).empty());
  auto self_loop = replace_line(bundled(), "edges", "edges = [[1, 1]]");
  CHECK_FALSE(issues_of(self_loop).empty());
}

TEST_CASE("syntax errors carry line numbers") {
  try {
    parse_document("[graph]\nnodes = 3\nedges = [[1, 2]\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().front().find("line") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_document("nodes = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_document("[graph]\nnodes 3\n"), ConfigError);
}

TEST_CASE("values") {
  CHECK(std::get<double>(parse_value("0.25").data) == 0.25);
  CHECK(std::get<bool>(parse_value("true").data));
  CHECK(std::get<std::string>(parse_value("\"a b\"").data) == "a b");
  CHECK(std::get<std::string>(parse_value("zero").data) == "zero");
  auto arr = std::get<std::vector<ConfigValue>>(parse_value("[1, [2, 3]]").data);
  CHECK(arr.size() == 2);
}

TEST_CASE("overrides") {
  auto c = parse_config(bundled());
  apply_override(c, "sim.dt", "0.02");
  CHECK(c.dt == 0.02);
  apply_override(c, "barrier.eta", "[1, 2, 3]");
  CHECK(c.eta(2) == 3.0);
  CHECK_THROWS_AS(apply_override(c, "sim.dt", "0"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "sim.nothing", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "dt", "1"), ConfigError);
}

TEST_CASE("scalar broadcast and defaults") {
  auto c = parse_config(bundled());
  CHECK(c.gamma.size() == 3);
  CHECK(c.kappa.size() == 3);
  CHECK(c.nominal.size() == 3);
  CHECK(c.nominal.isZero());
  CHECK(c.outer_cap == 16);
  CHECK(c.inner_cap == 64);
  auto s = build_scenario(c);
  CHECK(s.barriers[2].threshold == 0.18);
  CHECK(s.barriers[0].eta == 3.0);
  CHECK(s.boxes[1].upper(0) == 0.75);
}

TEST_CASE("normalization is a fixed point") {
  auto c = parse_config(bundled());
  const auto once = normalize(c);
  CHECK(parse_config(once) == c);
  CHECK(normalize(parse_config(once)) == once);
}

TEST_CASE("property: random scenarios survive normalization") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioConfig c;
    c.nodes = 1 + rng() % 5;
    const auto n = static_cast<Eigen::Index>(c.nodes);
    c.beta = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c.beta(i, i) = unit(rng);
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && unit(rng) < 0.5) {
          c.beta(i, j) = 0.01 + unit(rng);
          c.edges.push_back({static_cast<NodeId>(j), static_cast<NodeId>(i)});
        }
    }
    auto random_vec = [&](double lo, double hi) {
      Vec v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * unit(rng);
      return v;
    };
    c.gamma = random_vec(0.01, 1.0);
    c.u_max = random_vec(0.1, 2.0);
    c.threshold = random_vec(0.05, 0.9);
    c.eta = random_vec(0.1, 5.0);
    c.kappa = random_vec(0.1, 5.0);
    c.x0 = random_vec(0.0, 1.0);
    c.nominal = Vec::Zero(n);
    c.udot = trial % 2 ? UdotPolicy::backward_difference : UdotPolicy::zero;
    c.dt = 0.001 + 0.05 * unit(rng);
    c.t_final = c.dt * (2 + 500 * unit(rng));
    c.trace = trial % 3 == 0;
    c.collaboration = trial % 5 != 0;
    c.formats = trial % 2 ? std::vector<std::string>{"csv", "svg"} : std::vector<std::string>{"csv"};
    const auto text = normalize(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(normalize(back) == text);
  }
}

TEST_CASE("property: number formatting round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mag(-300, 300);
  for (int trial = 0; trial < 10000; ++trial) {
    const double v = (trial % 2 ? -1 : 1) * std::pow(10.0, mag(rng)) * std::uniform_real_distribution<double>(1, 10)(rng);
    const auto s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
    CHECK(std::get<double>(parse_value(s).data) == v);
  }
}
