#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfid/simulator.hpp"
#include "cfid/spectral_grid.hpp"
#include "doctest.h"

using namespace cfid;

namespace {

SimulationConfig sine_setup() {
  SimulationConfig sc;
  sc.g = {0.25};
  sc.alpha = 1.0;
  sc.init = PointInit{{0.0}};
  sc.fine_step = 1e-3;
  sc.total_steps = 4000;
  sc.save_stride = 100;
  sc.n_trajectories = 100;
  sc.seed = 42;
  return sc;
}

bool same_states(const Dataset& a, const Dataset& b) {
  if (a.trajectories.size() != b.trajectories.size()) return false;
  for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
    if (a.trajectories[k].states != b.trajectories[k].states) return false;
    if (a.trajectories[k].valid != b.trajectories[k].valid) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("Euler-Maruyama step") {
  const DriftSpec zero(DriftKind::zero, 2);
  const double x[2] = {0.4, -1.0}, g0[2] = {0.0, 0.0}, n[2] = {3.0, -2.0};
  CHECK(euler_maruyama_step(x, zero, g0, 0.1, n) == std::vector<double>{0.4, -1.0});
  const DriftSpec sine(DriftKind::sine1d, 1);
  const double x0[1] = {0.0}, g[1] = {0.25}, n1[1] = {1.7};
  CHECK(euler_maruyama_step(x0, sine, g, 1e-3, n1)[0] == doctest::Approx(0.25 * 1.7));
  const DriftSpec dw(DriftKind::doublewell1d, 1);
  const double x2[1] = {2.0}, z[1] = {0.0};
  CHECK(euler_maruyama_step(x2, dw, g, 0.1, z)[0] == doctest::Approx(1.4));
}

TEST_CASE("built-in fields") {
  auto at = [](DriftKind k, double a, double b) {
    const DriftSpec s(k, 2);
    const double x[2] = {a, b};
    double f[2];
    s(x, f);
    return std::array<double, 2>{f[0], f[1]};
  };
  CHECK(at(DriftKind::trig_singlewell2d, 0.3, 0.7)[0] == doctest::Approx(std::sin(0.7)));
  CHECK(at(DriftKind::trig_singlewell2d, 0.3, 0.7)[1] == doctest::Approx(-std::sin(0.3)));
  const auto ms = at(DriftKind::maier_stein, 0.5, 0.2);
  CHECK(ms[0] == doctest::Approx(0.5 - 0.125 - 0.5 * 0.04));
  CHECK(ms[1] == doctest::Approx(-(1 + 0.25) * 0.2));
  const auto pd = at(DriftKind::poly_doublewell2d, 1.0, 0.3);
  CHECK(pd[0] == doctest::Approx(0.3));
  CHECK(pd[1] == doctest::Approx(0.4 * 3.0 - 0.25));
  CHECK_THROWS_AS(DriftSpec(DriftKind::sine1d, 2), ConfigError);
  CHECK_THROWS_AS(DriftSpec::builtin("nope"), ConfigError);
}

TEST_CASE("1D sine setup: 41 observations at dt = 0.1, deterministic") {
  const auto sc = sine_setup();
  const Dataset a = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  CHECK(a.observations == 41);
  CHECK(a.dt == doctest::Approx(0.1));
  CHECK(a.trajectories.size() == 100);
  CHECK(a.trajectories[0].states[0] == 0.0);
  const Dataset b = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  CHECK(same_states(a, b));
  auto other = sc;
  other.seed = 43;
  CHECK_FALSE(same_states(a, generate_dataset(DriftSpec(DriftKind::sine1d, 1), other)));
}

TEST_CASE("2D trigonometric schedule and grid initial conditions") {
  SimulationConfig sc;
  sc.g = {0.1, 0.1};
  sc.init = GaussianFirstInit{};
  sc.fine_step = 1e-4;
  sc.save_stride = 4000;
  sc.total_steps = 400001;
  sc.n_trajectories = 2;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::trig_singlewell2d, 2), sc);
  CHECK(ds.observations == 101);
  CHECK(ds.dt == doctest::Approx(0.4));
  CHECK(ds.trajectories[0].states[1] == 0.0);  // second coordinate starts at 0

  SimulationConfig grid;
  grid.g = {0.0, 0.0};
  grid.init = GridInit{};
  grid.total_steps = grid.save_stride = 1;
  grid.n_trajectories = 100;
  const Dataset g = generate_dataset(DriftSpec(DriftKind::zero, 2), grid);
  CHECK(g.trajectories[0].states[0] == -1.0);
  CHECK(g.trajectories[0].states[1] == -1.0);
  CHECK(g.trajectories[99].states[0] == 1.0);
  CHECK(g.trajectories[99].states[1] == 1.0);
  CHECK(g.trajectories[1].states[1] == doctest::Approx(-1.0 + 2.0 / 9.0));
  // g = 0 and zero drift: constant trajectories.
  for (const auto& t : g.trajectories) {
    CHECK(t.states[0] == t.states[2]);
    CHECK(t.states[1] == t.states[3]);
  }
}

TEST_CASE("linear drift, alpha = 2: sample mean follows x0 e^{-t}") {
  SimulationConfig sc;
  sc.g = {0.5};
  sc.alpha = 2.0;
  sc.init = PointInit{{1.0}};
  sc.fine_step = 1e-3;
  sc.total_steps = 1000;
  sc.save_stride = 500;
  sc.n_trajectories = 10000;
  sc.seed = 3;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::linear, 1), sc);
  for (std::size_t j : {1u, 2u}) {
    const double t = 0.5 * static_cast<double>(j);
    double m = 0.0;
    for (const auto& tr : ds.trajectories) m += tr.states[j];
    m /= 1e4;
    // Variance of the OU state: g^2 (1 - e^{-2t}) with L = sqrt(2) W.
    const double se = std::sqrt(0.25 * (1 - std::exp(-2 * t)) / 1e4);
    CHECK(std::abs(m - std::exp(-t)) < 3 * se);
  }
}

TEST_CASE("overflowing trajectories are flagged, not thrown") {
  SimulationConfig sc;
  sc.g = {50.0};
  sc.alpha = 1.0;
  sc.init = PointInit{{0.0}};
  sc.fine_step = 0.1;
  sc.total_steps = 200;
  sc.save_stride = 10;
  sc.n_trajectories = 50;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::doublewell1d, 1), sc);
  CHECK(ds.valid_count() < 50);
  for (const auto* t : ds.valid_trajectories()) {
    for (double v : t->states) CHECK(std::isfinite(v));
  }
}

TEST_CASE("filter_box") {
  auto sc = sine_setup();
  sc.n_trajectories = 30;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  const double big[1] = {1e300}, nbig[1] = {-1e300};
  CHECK(same_states(filter_box(ds, nbig, big), ds));
  const double lo[1] = {-3.5}, hi[1] = {3.5};
  const Dataset f = filter_box(ds, lo, hi);
  CHECK(f.valid_count() < ds.valid_count());
  for (const auto& t : f.trajectories) {
    for (double v : t.states) CHECK(std::abs(v) <= 3.5);
  }
  const double tiny_lo[1] = {1.0}, tiny_hi[1] = {2.0};
  CHECK_THROWS_AS(filter_box(ds, tiny_lo, tiny_hi), EmptyDatasetError);
}

TEST_CASE("dataset files round-trip bitwise and malformed rows are named") {
  SimulationConfig sc;
  sc.g = {0.3, 0.2};
  sc.alpha = 1.2;
  sc.init = GaussianFirstInit{};
  sc.fine_step = 1e-2;
  sc.total_steps = 50;
  sc.save_stride = 10;
  sc.n_trajectories = 7;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::maier_stein, 2), sc);
  const auto path = std::filesystem::temp_directory_path() / "cfid_dataset_test.txt";
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  CHECK(same_states(ds, back));
  CHECK(back.dim == 2);
  CHECK(back.dt == ds.dt);
  CHECK(back.observations == ds.observations);
  CHECK(back.provenance == ds.provenance);

  // Drop one column from a data row.
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto at = text.find("@trajectory 2");
  const auto row = text.find('\n', at) + 1;
  const auto comma = text.find(',', row);
  const auto eol = text.find('\n', row);
  const auto line_no = std::count(text.begin(), text.begin() + static_cast<long>(row), '\n') + 1;
  text.erase(comma, eol - comma);
  std::ofstream(path) << text;
  try {
    (void)read_dataset(path);
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":" + std::to_string(line_no)) != std::string::npos);
  }
  std::filesystem::remove(path);
}
