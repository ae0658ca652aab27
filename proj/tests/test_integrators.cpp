#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pta/integrators.hpp"
#include "pta/models.hpp"

using namespace pta;

namespace {

FineState scalar(double x) { return {Vec{x}, Vec(0), 0.0}; }

double energy(const SpringParams& p, const FineState& s) {
  return kinetic_energy(p, s.x) + potential_energy(p, s.x, s.l);
}

}  // namespace

TEST_CASE("rk4 on a zero field only advances sigma") {
  const RhsFunction rhs = [](const FineState&, Vec& dx, Vec& dl) {
    dx = Vec{0.0};
    dl = Vec(0);
  };
  const FineState s = rk4_step(rhs, scalar(3.5), 0.1);
  CHECK(s.x[0] == 3.5);
  CHECK(s.sigma == doctest::Approx(0.1));
}

TEST_CASE("rk4 one step of exponential growth") {
  const RhsFunction rhs = [](const FineState& s, Vec& dx, Vec& dl) {
    dx = s.x;
    dl = Vec(0);
  };
  const double h = 0.1;
  const double x = rk4_step(rhs, scalar(1.0), h).x[0];
  const double taylor4 = 1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
  CHECK(x == doctest::Approx(taylor4).epsilon(1e-15));
  CHECK(std::abs(x - std::exp(h)) < 1e-7);
}

TEST_CASE("rk4 is exact on a constant field") {
  const RhsFunction rhs = [](const FineState&, Vec& dx, Vec& dl) {
    dx = Vec{1.0};
    dl = Vec(0);
  };
  CHECK(rk4_step(rhs, scalar(0.0), 0.25).x[0] == 0.25);
}

TEST_CASE("rk4 global error falls by about sixteen when the step halves") {
  FunctionSystem sys("exp", 1, 0, 1.0, [](const Vec& x, const Vec&) { return x; });
  auto err = [&](std::size_t n) {
    const auto tr = integrate(IntegratorKind::RK4, sys, scalar(1.0), 1.0 / static_cast<double>(n), n,
                              {SinkPolicy::KeepNone, 0, {}});
    return std::abs(tr.samples.back().x[0] - std::exp(1.0));
  };
  const double ratio = err(20) / err(40);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("integrate with one step equals one stepper call") {
  auto sys = rotating_planes(1e-3);
  const FineState s0{Vec{0.5, 0.5, 0.5, 0.5}, Vec(0), 0.0};
  const auto tr = integrate(IntegratorKind::RK4, *sys, s0, 0.01, 1);
  REQUIRE(tr.samples.size() == 2);
  FineState s = s0;
  Stepper(IntegratorKind::RK4, *sys, 0.01).step(s);
  CHECK(tr.samples[1].x == s.x);
  CHECK(tr.samples[1].sigma == s.sigma);
}

TEST_CASE("integration is bitwise deterministic") {
  auto sys = relaxation_oscillator(1e-3);
  const FineState s0{Vec{1.0, 1.2, 0.0}, Vec{0.0}, 0.0};
  const auto a = integrate(IntegratorKind::RK4, *sys, s0, 0.01, 2000);
  const auto b = integrate(IntegratorKind::RK4, *sys, s0, 0.01, 2000);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].l == b.samples[i].l);
  }
}

TEST_CASE("unit sphere stays invariant over a long rotating-planes run") {
  auto sys = rotating_planes(1e-5);
  const FineState s0{Vec{0.5, 0.5, 0.5, 0.5}, Vec(0), 0.0};
  double worst = 0.0;
  Sink sink{SinkPolicy::KeepNone, 0, [&](std::size_t, const FineState& s) {
              worst = std::max(worst, std::abs(norm(s.x) - 1.0));
            }};
  integrate(IntegratorKind::RK4, *sys, s0, 2.0 * std::numbers::pi / 1000.0, 100000, sink);
  CHECK(worst < 1e-3);
}

TEST_CASE("stepper errors carry the failing step index") {
  FunctionSystem sys("blow", 1, 0, 1.0, [](const Vec& x, const Vec&) { return Vec{x[0] * x[0]}; });
  try {
    integrate(IntegratorKind::RK4, sys, scalar(1.0), 0.5, 100);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("at step") != std::string::npos);
  }
}

TEST_CASE("verlet keeps a frozen equilibrium fixed") {
  for (const double k2 : {1e7, 2e7, 3.3e6}) {
    SpringParams p;
    p.k2 = k2;
    SpringsSystem sys(p);
    const FineState s0{Vec{0.02, 0.0, -0.01, 0.0}, Vec{0.02, -0.01}, 0.0};
    FineState s = s0;
    for (int i = 0; i < 100; ++i) s = verlet_damped_step(sys, s, 0.002, true);
    CHECK(s.x == s0.x);
    CHECK(s.l == s0.l);
  }
}

TEST_CASE("undamped verlet energy error stays bounded without drift") {
  SpringParams p;
  p.eta = 0.0;
  SpringsSystem sys(p);
  // second mass at rest on its wall, so its spring stays idle
  FineState s{Vec{0.1, 0.0, 0.0, 0.0}, Vec{0.0, 0.0}, 0.0};
  auto e1 = [&](const FineState& q) {
    return 0.5 * p.m1 * q.x[1] * q.x[1] + 0.5 * p.k1 * q.x[0] * q.x[0];
  };
  const double dsig = 1e-3;
  // one fast period is sigma = 1, so omega * dt = 2 pi dsig
  const double wh = 2.0 * std::numbers::pi * dsig;
  const double E0 = e1(s);
  double first = 0.0, last = 0.0;
  for (int i = 1; i <= 100000; ++i) {
    s = verlet_damped_step(sys, s, dsig, true);
    const double err = std::abs(e1(s) - E0) / E0;
    if (i <= 1000) first = std::max(first, err);
    if (i > 99000) last = std::max(last, err);
    CHECK(s.x[2] == 0.0);
  }
  CHECK(first < 0.5 * wh * wh);
  CHECK(last < 0.5 * wh * wh);
  CHECK(last == doctest::Approx(first).epsilon(1e-2));
  // a whole number of periods returns to the start up to the phase error
  CHECK(s.x[0] == doctest::Approx(0.1).epsilon(1e-2));
}

TEST_CASE("damped verlet dissipates energy for case 1") {
  SpringParams p;
  SpringsSystem sys(p);
  FineState s{Vec{0.5, 0.0, -0.1, 0.0}, Vec{0.0, 0.0}, 0.0};
  const double dsig = 1.0 / 500.0;
  const double wmax = 2.0 * std::numbers::pi * dsig * std::sqrt(3.0);  // stiffest mode bound
  double prev = energy(p, s), per_period = prev;
  const double E0 = prev;
  double worst_rise = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    s = verlet_damped_step(sys, s, dsig, true);
    const double e = energy(p, s);
    worst_rise = std::max(worst_rise, e - prev);
    prev = e;
    if (i % 500 == 0 && per_period > 1e-12 * E0) {
      CHECK(e < per_period);
      per_period = e;
    }
  }
  CHECK(worst_rise <= wmax * wmax * E0);
  // slowest mode loses about 0.11 of its amplitude per period
  CHECK(prev < 1e-3 * E0);
}

TEST_CASE("case 1 with frozen walls settles to the walls at rest") {
  SpringParams p;
  SpringsSystem sys(p);
  FineState s{Vec{0.5, 0.0, -0.1, 0.0}, Vec{0.0, 0.0}, 0.0};
  const Stepper st(IntegratorKind::VerletDamped, sys, 1.0 / 500.0, {true, false});
  for (int i = 0; i < 500 * 400; ++i) st.step(s);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s.x[i]) < 1e-6);
}

TEST_CASE("verlet needs the springs structure") {
  auto sys = rotating_planes(1e-3);
  CHECK_THROWS_AS(Stepper(IntegratorKind::VerletDamped, *sys, 0.01), ConfigError);
}

TEST_CASE("integrator names round trip") {
  CHECK(parse_integrator(to_string(IntegratorKind::RK4)) == IntegratorKind::RK4);
  CHECK(parse_integrator(to_string(IntegratorKind::VerletDamped)) == IntegratorKind::VerletDamped);
  CHECK_THROWS_AS(parse_integrator("euler"), ConfigError);
}

TEST_CASE("components decayed below the subnormal range snap to zero") {
  FunctionSystem sys("decay", 2, 0, 1.0, [](const Vec& x, const Vec&) { return -1.0 * x; });
  const Stepper st(IntegratorKind::RK4, sys, 0.1);
  FineState s{Vec{1e-250, 0.5}, Vec(0), 0.0};
  st.step(s);
  CHECK(s.x[0] == 0.0);
  CHECK(s.x[1] == doctest::Approx(0.5 * std::exp(-0.1)).epsilon(1e-6));
}
