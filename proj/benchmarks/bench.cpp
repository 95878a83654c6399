#include <random>

#include <benchmark/benchmark.h>

#include <ccbf/barrier.hpp>
#include <ccbf/collab.hpp>
#include <ccbf/config.hpp>
#include <ccbf/geometry.hpp>
#include <ccbf/log.hpp>
#include <ccbf/simulate.hpp>

using namespace ccbf;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

void closest_point_2d(benchmark::State& state) {
  const Box box(Vec::Zero(2), Vec::Ones(2));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::vector<std::vector<Halfspace>> polys;
  for (int k = 0; k < 64; ++k) {
    std::vector<Halfspace> hs;
    for (int m = 0; m < state.range(0); ++m) {
      const double th = angle(rng);
      const Vec n = v2(std::cos(th), std::sin(th));
      hs.push_back({n, -n.dot(v2(2.5, 2.5)) + 0.3});
    }
    polys.push_back(std::move(hs));
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(closest_point(box, polys[k++ % polys.size()]));
  }
}
BENCHMARK(closest_point_2d)->Arg(1)->Arg(2)->Arg(4);

std::vector<NodeProblem> sis3_problems(const Scenario& s, const NetworkState& x) {
  std::vector<NodeProblem> out;
  for (NodeId i = 0; i < 3; ++i) {
    auto nbr = snapshot(s.model->graph(), x, i);
    auto lie = lie_table(*s.model, nbr, i, s.barriers[i]);
    out.push_back({decompose_psi2(s.barriers[i], lie, nbr, udot_model(UdotPolicy::zero, 1, std::nullopt, 0.01)),
                   s.boxes[i]});
  }
  return out;
}

void collaborate_near_threshold(benchmark::State& state) {
  const auto s = build_scenario(load_config("paper_sis3"));
  NetworkState x{Vec::Constant(1, 0.099), Vec::Constant(1, 0.08), Vec::Constant(1, 0.06)};
  const auto problems = sis3_problems(s, x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(collaborative_safety(s.model->graph(), problems));
  }
}
BENCHMARK(collaborate_near_threshold);

void simulate_sis3_second(benchmark::State& state) {
  log().set_level(spdlog::level::off);
  auto s = build_scenario(load_config("paper_sis3"));
  s.sim.t_final = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(s));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(simulate_sis3_second)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
