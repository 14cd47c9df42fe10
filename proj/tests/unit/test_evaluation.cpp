#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfid/evaluation.hpp"
#include "doctest.h"

using namespace cfid;

namespace {

Dataset rows_1d(const std::vector<std::vector<double>>& paths) {
  Dataset ds;
  ds.dim = 1;
  ds.dt = 0.1;
  ds.observations = paths.front().size();
  for (const auto& p : paths) ds.trajectories.push_back({p, true});
  return ds;
}

// f = (s1 sin x1, s2 sin x2): a single fixed point at the origin on [-1, 1]^2.
FourierDrift sine_pair(double s1, double s2) {
  FourierDrift m(2, 2, 2);
  m.coeff(MultiIndex{2, 0, 0}, 0) = cplx(0.0, -0.5 * s1);
  m.coeff(MultiIndex{-2, 0, 0}, 0) = cplx(0.0, 0.5 * s1);
  m.coeff(MultiIndex{0, 2, 0}, 1) = cplx(0.0, -0.5 * s2);
  m.coeff(MultiIndex{0, -2, 0}, 1) = cplx(0.0, 0.5 * s2);
  return m;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("coeff_mae") {
  const FourierDrift truth = sine_embedding(0.5, 4, 2);
  CHECK(coeff_mae(truth, truth) == 0.0);
  FourierDrift off = truth;
  off.coeff(MultiIndex{3, 0, 0}, 0) += cplx(3.0, 4.0);
  CHECK(coeff_mae(off, truth) == doctest::Approx(5.0 / 9.0));
  CHECK(coeff_mae(FourierDrift(1, 4, 2), truth) == doctest::Approx(1.0 / 9.0));
  CHECK_THROWS_AS(coeff_mae(FourierDrift(1, 3, 2), truth), ConfigError);
  CHECK_THROWS_AS(coeff_mae(FourierDrift(1, 4, 3), truth), ConfigError);
}

TEST_CASE("a one-point scan equals mmd_loss") {
  SimulationConfig sc;
  sc.g = {0.25};
  sc.init = GaussianFirstInit{1, 0.0, 1.0};
  sc.total_steps = 500;
  sc.save_stride = 100;
  sc.n_trajectories = 50;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  LossConfig lc;
  lc.grid = SpectralGrid(1, 2, 64, 8);
  lc.g = {0.25};
  lc.nu = 5;
  const Embedding emb = [](double t) { return sine_embedding(t, 4, 2); };
  const auto scan = loss_scan(ds, emb, {0.3, 0.5}, lc);
  REQUIRE(scan.size() == 2);
  CHECK(scan[0].theta == 0.3);
  CHECK(scan[1].loss == doctest::Approx(mmd_loss(sine_embedding(0.5, 4, 2), ds, lc)).epsilon(1e-12));
  CHECK(scan[1].loss < scan[0].loss);

  const auto path = std::filesystem::temp_directory_path() / "cfid_scan_test.csv";
  write_scan_csv(scan, path);
  CHECK(count_lines(path) == 3);
  std::filesystem::remove(path);
}

TEST_CASE("paired trajectory error") {
  // Errors 0.5 and 0 over j >= 1: median 0.25, type-7 IQR 0.25.
  const Dataset a = rows_1d({{0.0, 1.0, 2.0}});
  const Dataset b = rows_1d({{9.0, 1.5, 2.0}});
  const auto e = paired_error(a, b);
  CHECK(e.mmae == doctest::Approx(0.25));
  CHECK(e.miqr == doctest::Approx(0.25));
  CHECK(paired_error(a, a).mmae == 0.0);

  // Medians over three trajectories; the invalid one is skipped.
  Dataset c = rows_1d({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  Dataset d = rows_1d({{0, 1, 1}, {0, 2, 2}, {0, 7, 7}, {0, 100, 100}});
  d.trajectories[3].valid = false;
  CHECK(paired_error(c, d).mmae == doctest::Approx(2.0));
  CHECK(paired_error(c, d).miqr == 0.0);

  Dataset none = c;
  for (auto& t : none.trajectories) t.valid = false;
  CHECK_THROWS_AS(paired_error(none, d), EmptyDatasetError);
  CHECK_THROWS_AS(paired_error(a, c), ConfigError);
}

TEST_CASE("trajectory test error") {
  SimulationConfig sc;
  sc.g = {0.25};
  sc.total_steps = 1000;
  sc.save_stride = 100;
  const FourierDrift model = sine_embedding(0.5, 4, 2);

  SUBCASE("shared noise with the same drift gives zero error") {
    const auto rep = trajectory_test_error(model, DriftSpec(model), sc, 30, 5);
    CHECK(rep.shared_noise.mmae == 0.0);
    CHECK(rep.shared_noise.miqr == 0.0);
    CHECK(rep.learned.mmae > 0.0);
    CHECK(rep.used_trajectories + rep.dropped_trajectories == 30);
    CHECK_FALSE(rep.coeff_mae.has_value());
  }
  SUBCASE("the truth embedding is close to the built-in sine under shared noise") {
    const auto rep = trajectory_test_error(model, DriftSpec(DriftKind::sine1d, 1), sc, 20, 6);
    CHECK(rep.shared_noise.mmae < 1e-10);
  }
  SUBCASE("a single test trajectory is its own median") {
    const auto rep = trajectory_test_error(model, DriftSpec(model), sc, 1, 7);
    CHECK(rep.used_trajectories == 1);
    CHECK(std::isfinite(rep.learned.mmae));
  }
  CHECK_THROWS_AS(trajectory_test_error(model, DriftSpec(model), sc, 0, 1), ConfigError);
  CHECK_THROWS_AS(trajectory_test_error(model, DriftSpec(DriftKind::maier_stein, 2), sc, 3, 1),
                  ConfigError);
}

TEST_CASE("phase portrait") {
  SUBCASE("zero model is degenerate") {
    const auto p = phase_portrait(FourierDrift(2, 2, 2), {-1, -1}, {1, 1}, 10);
    CHECK(p.degenerate);
    CHECK(p.fixed_points.empty());
  }
  SUBCASE("classification at the origin") {
    const struct {
      double s1, s2;
      FixedPointKind kind;
    } cases[] = {{1, -1, FixedPointKind::saddle},
                 {-1, -1, FixedPointKind::stable},
                 {1, 1, FixedPointKind::unstable}};
    for (const auto& c : cases) {
      const auto p = phase_portrait(sine_pair(c.s1, c.s2), {-1, -1}, {1, 1}, 20);
      CHECK_FALSE(p.degenerate);
      REQUIRE(p.fixed_points.size() == 1);
      CHECK(p.fixed_points[0].kind == c.kind);
      CHECK(std::abs(p.fixed_points[0].x[0]) < 0.11);
      CHECK(std::abs(p.fixed_points[0].x[1]) < 0.11);
    }
  }
  SUBCASE("layout and files") {
    const FourierDrift m = sine_pair(1, -1);
    const auto p = phase_portrait(m, {-1, -2}, {1, 2}, 7);
    CHECK(p.f1.size() == 49);
    CHECK(p.x1(6) == 1.0);
    CHECK(p.x2(0) == -2.0);
    const double x[2] = {p.x1(2), p.x2(5)};
    const auto f = evaluate_field(m, x);
    CHECK(p.f1[2 * 7 + 5] == doctest::Approx(f[0]));
    CHECK(p.f2[2 * 7 + 5] == doctest::Approx(f[1]));

    const auto dir = std::filesystem::temp_directory_path();
    write_portrait_csv(p, dir / "cfid_portrait_test.csv");
    write_fixed_points_csv(p, dir / "cfid_fixed_test.csv");
    CHECK(count_lines(dir / "cfid_portrait_test.csv") == 50);
    CHECK(count_lines(dir / "cfid_fixed_test.csv") == p.fixed_points.size() + 1);
    std::ifstream in(dir / "cfid_portrait_test.csv");
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    CHECK(header == "x1,x2,f1,f2");
    CHECK(first.substr(0, first.find(',')) == second.substr(0, second.find(',')));
    std::filesystem::remove(dir / "cfid_portrait_test.csv");
    std::filesystem::remove(dir / "cfid_fixed_test.csv");
  }
  CHECK_THROWS_AS(phase_portrait(sine_embedding(0.5, 4, 2), {-1, -1}, {1, 1}, 10), ConfigError);
  CHECK_THROWS_AS(phase_portrait(FourierDrift(2, 1, 2), {-1, -1}, {1, 1}, 1), ConfigError);
  CHECK_THROWS_AS(phase_portrait(FourierDrift(2, 1, 2), {1, -1}, {1, 1}, 10), ConfigError);
}
