#include <cmath>
#include <limits>

#include "cfid/common.hpp"
#include "cfid/optimizer.hpp"
#include "doctest.h"

using namespace cfid;

namespace {

double rosenbrock(std::span<const double> x, std::vector<double>& g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
  return a * a + 100.0 * b * b;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("Rosenbrock from (-1.2, 1)") {
  OptimizerOptions opt;
  opt.grad_tol = 1e-8;
  opt.max_iterations = 500;
  int calls = 0;
  const auto r = minimize_trust_sr1(rosenbrock, {-1.2, 1.0}, opt,
                                    [&](const IterationRecord&) { ++calls; });
  CHECK(r.reason == Termination::gradient_tolerance);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-6);
  CHECK(r.f < 1e-12);
  CHECK(calls == static_cast<int>(r.history.size()));
  // Accepted steps never increase the objective.
  double prev = 24.2;
  for (const auto& h : r.history) {
    CHECK(h.loss <= prev);
    prev = h.loss;
  }
}

TEST_CASE("quadratic: exact in a few iterations") {
  // f = 1/2 x.Ax - b.x with A = diag(1, 10, 100).
  const auto f = [](std::span<const double> x, std::vector<double>& g) {
    const double a[3] = {1, 10, 100}, b[3] = {1, 2, 3};
    double v = 0.0;
    g.assign(3, 0.0);
    for (int i = 0; i < 3; ++i) {
      v += 0.5 * a[i] * x[i] * x[i] - b[i] * x[i];
      g[i] = a[i] * x[i] - b[i];
    }
    return v;
  };
  OptimizerOptions opt;
  opt.initial_radius = 10.0;
  const auto r = minimize_trust_sr1(f, {0, 0, 0}, opt);
  CHECK(r.reason == Termination::gradient_tolerance);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.2));
  CHECK(r.x[2] == doctest::Approx(0.03));
  CHECK(r.history.size() < 30);
}

TEST_CASE("Steihaug CG") {
  const std::vector<double> B = {2, 0, 0, 4};
  const std::vector<double> g = {-2, -4};
  SUBCASE("interior: small gradients get the Newton step") {
    const std::vector<double> small = {-2e-3, -4e-3};
    const auto s = steihaug_cg(B, small, 10.0);
    CHECK(s[0] == doctest::Approx(1e-3));
    CHECK(s[1] == doctest::Approx(1e-3));
  }
  SUBCASE("interior: large gradients stop at the forcing tolerance") {
    const auto s = steihaug_cg(B, g, 10.0);
    const double r0 = 2 * s[0] - 2, r1 = 4 * s[1] - 4;
    CHECK(std::hypot(r0, r1) <= 0.5 * std::hypot(2.0, 4.0));
    CHECK(g[0] * s[0] + g[1] * s[1] + s[0] * s[0] + 2 * s[1] * s[1] < 0.0);
  }
  SUBCASE("boundary") {
    const auto s = steihaug_cg(B, g, 0.5);
    CHECK(norm(s) == doctest::Approx(0.5));
    CHECK(g[0] * s[0] + g[1] * s[1] < 0.0);
  }
  SUBCASE("negative curvature goes to the boundary") {
    const std::vector<double> neg = {-1, 0, 0, 1};
    const auto s = steihaug_cg(neg, std::vector<double>{-1, 0}, 2.0);
    CHECK(norm(s) == doctest::Approx(2.0));
    CHECK(s[0] > 0.0);
  }
  CHECK_THROWS_AS(steihaug_cg(std::vector<double>{1, 2, 3}, g, 1.0), ConfigError);
}

TEST_CASE("infinite trial values are rejected, not accepted") {
  // f is +inf for x > 0.5, otherwise (x - 1)^2.
  const auto f = [](std::span<const double> x, std::vector<double>& g) {
    g = {2.0 * (x[0] - 1.0)};
    return x[0] > 0.5 ? std::numeric_limits<double>::infinity() : (x[0] - 1.0) * (x[0] - 1.0);
  };
  OptimizerOptions opt;
  opt.initial_radius = 4.0;
  opt.max_iterations = 60;
  const auto r = minimize_trust_sr1(f, {-2.0}, opt);
  CHECK(r.x[0] <= 0.5);
  CHECK(std::isfinite(r.f));
  CHECK(r.x[0] > 0.4);
  bool rejected = false;
  for (const auto& h : r.history) rejected = rejected || !h.accepted;
  CHECK(rejected);
}

TEST_CASE("iteration cap and option checks") {
  OptimizerOptions opt;
  opt.max_iterations = 3;
  const auto r = minimize_trust_sr1(rosenbrock, {-1.2, 1.0}, opt);
  CHECK(r.reason == Termination::max_iterations);
  CHECK(r.history.size() == 3);
  opt.max_iterations = 0;
  const auto z = minimize_trust_sr1(rosenbrock, {-1.2, 1.0}, opt);
  CHECK(z.x == std::vector<double>{-1.2, 1.0});
  CHECK(z.f == doctest::Approx(24.2));

  OptimizerOptions bad;
  bad.grad_tol = 0.0;
  CHECK_THROWS_AS(minimize_trust_sr1(rosenbrock, {0, 0}, bad), ConfigError);
  bad = {};
  bad.initial_radius = -1.0;
  CHECK_THROWS_AS(minimize_trust_sr1(rosenbrock, {0, 0}, bad), ConfigError);
  const auto nan_start = [](std::span<const double>, std::vector<double>& g) {
    g = {0.0};
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(minimize_trust_sr1(nan_start, {0.0}, OptimizerOptions{}), Error);
}
