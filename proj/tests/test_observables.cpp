#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pta/observables.hpp"

using namespace pta;

namespace {

Measurement coord(std::size_t i, double norm = 1.0) {
  Measurement m;
  m.name = "x" + std::to_string(i);
  m.f = [i](const Vec& x, const Vec&) { return x[i]; };
  m.normalization = norm;
  return m;
}

Measurement square(std::size_t i) {
  Measurement m;
  m.name = "sq" + std::to_string(i);
  m.f = [i](const Vec& x, const Vec&) { return x[i] * x[i]; };
  return m;
}

// cos/sin circle samples at 500 per period
SampleStream circle(std::size_t limit) {
  auto i = std::make_shared<std::size_t>(0);
  return [i, limit]() -> std::optional<FineState> {
    if (*i >= limit) return std::nullopt;
    const double s = 2.0 * std::numbers::pi * static_cast<double>(++*i) / 500.0;
    return FineState{Vec{std::cos(s), std::sin(s)}, Vec(0), s};
  };
}

std::vector<FineState> circle_window(std::size_t n, double dsig) {
  std::vector<FineState> w;
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = dsig * static_cast<double>(i);
    w.push_back({Vec{std::cos(s), 0.0, std::sin(s)}, Vec(0), s});
  }
  return w;
}

}  // namespace

TEST_CASE("constant stream converges once the checkpoints fill after the skip") {
  ConvergenceCriterion c;
  c.k = 10;
  c.p = 5;
  c.n_min = 200;
  std::size_t n = 0;
  SampleStream s = [&]() -> std::optional<FineState> {
    ++n;
    return FineState{Vec{2.5}, Vec(0), 0.0};
  };
  const auto r = running_average(s, {coord(0)}, c);
  CHECK(r.N == 60);
  CHECK(n == 260);
  CHECK(r.R[0] == doctest::Approx(2.5));
}

TEST_CASE("running mean of a cosine converges on the absolute branch") {
  ConvergenceCriterion c;
  c.tol2 = 1e-5;
  c.k = 500;
  c.p = 5;
  c.n_min = 500;
  const auto r = running_average(circle(1000000), {coord(0)}, c);
  CHECK(std::abs(r.R[0]) < 1e-3);
  CHECK(r.N % 500 == 0);
}

TEST_CASE("running mean of cos squared approaches one half") {
  ConvergenceCriterion c;
  c.tol1 = 1e-2;
  c.k = 50;
  c.p = 5;
  c.n_min = 500;
  const auto r = running_average(circle(1000000), {square(0)}, c);
  CHECK(r.R[0] == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("exhausted stream raises NoConvergence with the last mean") {
  ConvergenceCriterion c;
  c.k = 1;
  c.n_min = 1000;
  try {
    running_average(circle(100), {coord(1)}, c);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.samples == 100);
    CHECK(e.last_means.size() == 1);
  }
}

TEST_CASE("running average is affine in the measurement") {
  ConvergenceCriterion c;
  c.k = 25;
  c.n_min = 500;
  c.tol1 = 1e-3;
  Measurement a = coord(1);
  Measurement b;
  b.name = "affine";
  b.f = [](const Vec& x, const Vec&) { return 3.0 * x[1] + 2.0; };
  RunningAverage ra(2, c);
  auto s = circle(700);
  double m0 = 0, m1 = 0;
  while (auto x = s()) {
    const double v[2] = {a(*x), b(*x)};
    ra.push(v);
    m0 = ra.means()[0];
    m1 = ra.means()[1];
  }
  CHECK(m1 == doctest::Approx(3.0 * m0 + 2.0));
}

TEST_CASE("normalization scales means but not decisions") {
  ConvergenceCriterion c;
  c.k = 50;
  c.n_min = 500;
  c.tol2 = 1e-30;
  const auto r1 = running_average(circle(100000), {square(0)}, c);
  Measurement scaled = square(0);
  scaled.normalization = 40.0;
  const auto r2 = running_average(circle(100000), {scaled}, c);
  CHECK(r1.N == r2.N);
  CHECK(r2.R[0] * 40.0 == doctest::Approx(r1.R[0]));
}

TEST_CASE("rate and extrapolation arithmetic") {
  CHECK(rate_of_change(2, 1, 0.05) == doctest::Approx(20));
  CHECK(rate_of_change(0.7, 0.7, 0.3) == 0.0);
  CHECK(rate_of_change(0.5, 0.5 + 1e-10, 0.001) == doctest::Approx(-1e-7).epsilon(1e-6));
  CHECK_THROWS_AS(rate_of_change(1, 0, 0.0), ConfigError);
  CHECK(extrapolate(1, 2, 0.25) == 1.5);
  CHECK(extrapolate(0.3, 0, 0.25) == 0.3);
  CHECK(extrapolate(0.5, 20, 0.25) == 5.5);
}

TEST_CASE("window average") {
  const Measurement m = coord(0);
  std::vector<FineState> c(7, FineState{Vec{4.0}, Vec(0), 0.0});
  CHECK(window_average(c, m, 7) == 4.0);
  std::vector<FineState> two{{Vec{1.0}, Vec(0), 0.0}, {Vec{3.0}, Vec(0), 0.1}};
  CHECK(window_average(two, m, 2) == 2.0);
  CHECK_THROWS_AS(window_average(two, m, 3), ContractError);

  const auto w = circle_window(500 * 3, 2.0 * std::numbers::pi / 500.0);
  CHECK(window_average(w, square(0), w.size()) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("window average is invariant under cyclic shifts") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<FineState> w;
  for (int i = 0; i < 64; ++i) w.push_back({Vec{u(rng)}, Vec(0), 0.0});
  const double base = window_average(w, square(0), w.size());
  for (int s = 1; s < 64; s += 7) {
    auto r = w;
    std::rotate(r.begin(), r.begin() + s, r.end());
    CHECK(window_average(r, square(0), r.size()) == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("simpson observable is exact through cubics") {
  CHECK(simpson_observable({2.0, 2.0, 2.0}) == 2.0);
  CHECK(simpson_observable({0.0, 0.5, 1.0}) == doctest::Approx(0.5));
  CHECK(simpson_observable({0.0, 0.125, 1.0}) == doctest::Approx(0.25));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 20; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    auto f = [&](double x) { return a + b * x + c * x * x + d * x * x * x; };
    const double mean = a + b / 2 + c / 3 + d / 4;
    CHECK(simpson_observable({f(0), f(0.5), f(1)}) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("composite simpson") {
  std::vector<double> f;
  const std::size_t n = 100;
  for (std::size_t i = 0; i <= n; ++i) f.push_back(std::sin(std::numbers::pi * i / n));
  CHECK(simpson_integrate(f, std::numbers::pi / n) == doctest::Approx(2.0).epsilon(1e-7));
  f.pop_back();
  CHECK_THROWS_AS(simpson_integrate(f, 0.1), ContractError);
}

TEST_CASE("support max") {
  const Vec e{1, 0, 0};
  std::vector<FineState> one{{Vec{0.3, 2.0, -1.0}, Vec(0), 0.0}};
  CHECK(support_max(one, e) == 0.3);
  const auto w = circle_window(5000, 2.0 * std::numbers::pi / 5000.0);
  CHECK(support_max(w, e) == doctest::Approx(1.0).epsilon(1e-3));
  auto shifted = w;
  const Vec c{0.25, -1.0, 3.0};
  for (auto& s : shifted) s.x = s.x + c;
  const Vec d = (1.0 / std::sqrt(3.0)) * Vec{1, 1, 1};
  CHECK(support_max(shifted, d) == doctest::Approx(support_max(w, d) + dot(c, d)));
  CHECK_THROWS_AS(support_max(w, Vec{2, 0, 0}), ContractError);
}

TEST_CASE("criterion validation") {
  ConvergenceCriterion c;
  c.tol1 = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
