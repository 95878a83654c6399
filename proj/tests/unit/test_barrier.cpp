#include <doctest.h>

#include <cmath>
#include <random>

#include <ccbf/barrier.hpp>
#include <ccbf/errors.hpp>
#include <ccbf/integrator.hpp>
#include <ccbf/sis.hpp>

#include "oracles.hpp"

using namespace ccbf;

namespace {

SisParams sis3_params() {
  SisParams p;
  p.beta = Mat::Constant(3, 3, 0.25);
  p.beta.diagonal().setConstant(0.5);
  p.gamma = Vec::Constant(3, 0.3);
  p.u_max = Vec::Constant(3, 0.75);
  return p;
}

oracle::Sis to_oracle(const SisParams& p) {
  oracle::Sis s;
  for (Eigen::Index i = 0; i < p.gamma.size(); ++i) {
    s.beta.emplace_back();
    for (Eigen::Index j = 0; j < p.gamma.size(); ++j) s.beta.back().push_back(p.beta(i, j));
    s.gamma.push_back(p.gamma(i));
  }
  return s;
}

NetworkState state(const std::vector<double>& xs) {
  NetworkState x;
  for (double v : xs) x.push_back(Vec::Constant(1, v));
  return x;
}

Vec scalar(double v) { return Vec::Constant(1, v); }

QuadraticForm quad(double c, double l, double q) {
  return QuadraticForm{c, Vec::Constant(1, l), Mat::Constant(1, 1, q)};
}

ControlRegion interval(double lo, double hi) { return ControlRegion(Box::interval(lo, hi)); }

}  // namespace

TEST_CASE("psi0 examples") {
  CHECK(psi0(BarrierSpec{0.1}, scalar(0.1)) == 0.0);
  CHECK(psi0(BarrierSpec{0.1}, scalar(0.04)) == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(psi0(BarrierSpec{0.18}, scalar(0.2)) == doctest::Approx(-0.02).epsilon(1e-12));
}

TEST_CASE("psi1 examples") {
  SisModel m(complete_graph(3), sis3_params());
  auto x = state({0.04, 0.01, 0.02});
  BarrierSpec spec{0.1, 1.0, 1.0};
  auto lie = lie_table(m, snapshot(m.graph(), x, 0), 0, spec);
  CHECK(psi1(spec, lie, x[0], scalar(0.0)) == doctest::Approx(0.0456).epsilon(1e-12));
  CHECK(psi1(spec, lie, x[0], scalar(0.75)) == doctest::Approx(0.0756).epsilon(1e-12));
  BarrierSpec no_eta{0.1, 0.0, 1.0};
  CHECK(psi1(no_eta, lie, x[0], scalar(0.0)) == lie.lf_h);
}

TEST_CASE("udot policies") {
  CHECK(udot(UdotPolicy::zero, scalar(0.4), scalar(0.1), 0.01)(0) == 0.0);
  CHECK(udot(UdotPolicy::backward_difference, scalar(0.5), scalar(0.3), 0.01)(0) ==
        doctest::Approx(20.0).epsilon(1e-12));
  CHECK(udot(UdotPolicy::backward_difference, scalar(0.5), std::nullopt, 0.01)(0) == 0.0);
  auto affine = udot_model(UdotPolicy::backward_difference, 1, scalar(0.3), 0.01);
  CHECK(affine(scalar(0.5))(0) == doctest::Approx(20.0).epsilon(1e-12));
  auto fallback = udot_model(UdotPolicy::backward_difference, 1, std::nullopt, 0.01);
  CHECK(fallback(scalar(0.5))(0) == 0.0);
  CHECK(parse_udot_policy("backward_difference") == UdotPolicy::backward_difference);
  CHECK(to_string(UdotPolicy::zero) == "zero");
  CHECK_THROWS(parse_udot_policy("forward"));
}

TEST_CASE("isolated node has no coupling") {
  SisParams p;
  p.beta = Mat::Constant(1, 1, 0.5);
  p.gamma = Vec::Constant(1, 0.3);
  p.u_max = Vec::Constant(1, 0.75);
  SisModel m(NetworkGraph(1, {}), p);
  BarrierSpec spec{0.1, 1.0, 1.0};
  auto nbr = snapshot(m.graph(), state({0.05}), 0);
  auto lie = lie_table(m, nbr, 0, spec);
  auto d = decompose_psi2(spec, lie, nbr, udot_model(UdotPolicy::zero, 1, std::nullopt, 0.01));
  CHECK(d.coupling.empty());
  CHECK(d.evaluate(scalar(0.3), {}) == d.self_term(scalar(0.3)));
}

TEST_CASE("coupling coefficient for SIS") {
  SisParams p;
  p.beta = Mat::Constant(2, 2, 0.25);
  p.gamma = Vec::Constant(2, 0.3);
  p.u_max = Vec::Constant(2, 0.75);
  SisModel m(complete_graph(2), p);
  BarrierSpec spec{0.5, 1.0, 1.0};
  auto nbr = snapshot(m.graph(), state({0.1, 0.2}), 0);
  auto d = decompose_psi2(spec, lie_table(m, nbr, 0, spec), nbr,
                          udot_model(UdotPolicy::zero, 1, std::nullopt, 0.01));
  CHECK(d.coupling.at(1)(0) == doctest::Approx(0.9 * 0.25 * 0.2).epsilon(1e-14));
}

TEST_CASE("missing neighbor entry is a protocol error") {
  SisModel m(complete_graph(3), sis3_params());
  BarrierSpec spec{0.1, 1.0, 1.0};
  auto nbr = snapshot(m.graph(), state({0.04, 0.01, 0.02}), 0);
  auto lie = lie_table(m, nbr, 0, spec);
  lie.lgj_lfi_h.erase(2);
  CHECK_THROWS_AS(decompose_psi2(spec, lie, nbr, udot_model(UdotPolicy::zero, 1, std::nullopt, 0.01)),
                  ProtocolStateError);
}

TEST_CASE("property: decomposition reassembles psi2") {
  auto params = sis3_params();
  SisModel m(complete_graph(3), params);
  auto ref = to_oracle(params);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x{unit(rng), unit(rng), unit(rng)};
    std::vector<double> u{0.75 * unit(rng), 0.75 * unit(rng), 0.75 * unit(rng)};
    const BarrierSpec spec{0.05 + 0.3 * unit(rng), 3 * unit(rng), 3 * unit(rng)};
    const bool rate = trial % 2 == 1;
    const double prev = 0.75 * unit(rng);
    const double dt = 0.01;
    for (NodeId i = 0; i < 3; ++i) {
      auto nbr = snapshot(m.graph(), state(x), i);
      auto lie = lie_table(m, nbr, i, spec);
      auto model = rate ? udot_model(UdotPolicy::backward_difference, 1, scalar(prev), dt)
                        : udot_model(UdotPolicy::zero, 1, std::nullopt, dt);
      auto d = decompose_psi2(spec, lie, nbr, model);
      std::map<NodeId, Vec> others;
      for (NodeId j = 0; j < 3; ++j)
        if (j != i) others[j] = scalar(u[j]);
      const double udot_i = rate ? (u[i] - prev) / dt : 0.0;
      const double want = ref.psi2(x, u, i, spec.threshold, spec.eta, spec.kappa, udot_i);
      CHECK(std::abs(d.evaluate(scalar(u[i]), others) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("property: psi2 telescopes into the time derivative of psi1") {
  auto params = sis3_params();
  SisModel m(complete_graph(3), params);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double h = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    auto behind = state({unit(rng), unit(rng), unit(rng)});
    auto u = state({0.75 * unit(rng), 0.75 * unit(rng), 0.75 * unit(rng)});
    const BarrierSpec spec{0.2, 1.0 + unit(rng), 1.0 + unit(rng)};
    auto x = rk4_step(m, behind, u, h);
    auto ahead = rk4_step(m, x, u, h);
    for (NodeId i = 0; i < 3; ++i) {
      auto p1 = [&](const NetworkState& s) {
        return psi1(spec, lie_table(m, snapshot(m.graph(), s, i), i, spec), s[i], u[i]);
      };
      const double rate = (p1(ahead) - p1(behind)) / (2 * h);
      auto nbr = snapshot(m.graph(), x, i);
      auto d = decompose_psi2(spec, lie_table(m, nbr, i, spec), nbr,
                              udot_model(UdotPolicy::zero, 1, std::nullopt, h));
      std::map<NodeId, Vec> others;
      for (NodeId j = 0; j < 3; ++j)
        if (j != i) others[j] = u[j];
      CHECK(std::abs(d.evaluate(u[i], others) - (rate + spec.kappa * p1(x))) < 1e-4);
    }
  }
}

TEST_CASE("max_capability examples") {
  auto a = max_capability(quad(0.0, 1.0, -1.0), interval(0, 0.75));
  CHECK(a.value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(a.argmax(0) == doctest::Approx(0.5).epsilon(1e-14));
  auto b = max_capability(quad(0.0, 1.0, 0.0), interval(0, 0.75));
  CHECK(b.value == doctest::Approx(0.75));
  CHECK(b.argmax(0) == 0.75);
  auto frozen = max_capability(quad(0.0, 1.0, -1.0), ControlRegion::frozen(Box::interval(0, 1), scalar(0.2)));
  CHECK(frozen.value == doctest::Approx(0.16));
  CHECK_THROWS_AS(max_capability(quad(0, 1, 0), ControlRegion(Box::interval(0, 0.75), {Halfspace{scalar(1.0), -0.9}})),
                  EmptyRegionError);
}

TEST_CASE("property: 1-D capability matches a grid search") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto q = quad(coef(rng), coef(rng), coef(rng));
    const double lo = coef(rng);
    const double hi = lo + 0.01 + 2 * unit(rng);
    auto cap = max_capability(q, interval(lo, hi));
    double best = -std::numeric_limits<double>::infinity();
    const int g = 10000;
    for (int k = 0; k <= g; ++k) best = std::max(best, q(scalar(lo + (hi - lo) * k / g)));
    CHECK(cap.value >= best - 1e-12);
    CHECK(cap.value - best < 1e-6);
    CHECK(std::abs(q(cap.argmax) - cap.value) < 1e-12);
  }
}

TEST_CASE("property: 2-D concave capability matches a grid search") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Mat r(2, 2);
    r << coef(rng), coef(rng), coef(rng), coef(rng);
    QuadraticForm q{coef(rng), Vec::Random(2), -(r.transpose() * r) - 0.1 * Mat::Identity(2, 2)};
    Box box(Vec::Constant(2, -0.5), Vec::Constant(2, 0.5));
    auto cap = max_capability(q, ControlRegion(box));
    double best = -std::numeric_limits<double>::infinity();
    const int g = 400;
    for (int a = 0; a <= g; ++a)
      for (int b = 0; b <= g; ++b) {
        Vec u(2);
        u << -0.5 + 1.0 * a / g, -0.5 + 1.0 * b / g;
        best = std::max(best, q(u));
      }
    CHECK(cap.value >= best - 1e-9);
    CHECK(cap.value - best < 1e-4);
    CHECK(box.contains(cap.argmax));
  }
}

TEST_CASE("property: enlarging the region never lowers capability") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto q = quad(coef(rng), coef(rng), -std::abs(coef(rng)));
    const double cut = 0.7 * unit(rng);
    ControlRegion small(Box::interval(0, 0.75), {Halfspace{scalar(1.0), -cut}});
    auto big = interval(0, 0.75);
    CHECK(max_capability(q, big).value >= max_capability(q, small).value - 1e-15);
  }
}

TEST_CASE("SIS capability is concave in the own control") {
  SisModel m(complete_graph(3), sis3_params());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = state({unit(rng), unit(rng), unit(rng)});
    BarrierSpec spec{0.1, 1.0, 1.0};
    auto nbr = snapshot(m.graph(), x, 0);
    auto lie = lie_table(m, nbr, 0, spec);
    CHECK(lie.lg2_h(0, 0) == doctest::Approx(-x[0](0)));
    auto d = decompose_psi2(spec, lie, nbr, udot_model(UdotPolicy::zero, 1, std::nullopt, 0.01));
    CHECK(d.self_term.quadratic(0, 0) <= 0.0);
  }
}
