#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfid/training.hpp"
#include "doctest.h"

using namespace cfid;

namespace {

const Dataset& sine_data() {
  static const Dataset ds = [] {
    SimulationConfig sc;
    sc.g = {0.25};
    sc.alpha = 1.0;
    // Spread start: a point mass keeps |ECF| near 1 out to the edge of this
    // small grid, and truncation then biases the fit.
    sc.init = GaussianFirstInit{1, 0.0, 1.0};
    sc.fine_step = 1e-3;
    sc.total_steps = 2000;
    sc.save_stride = 100;
    sc.n_trajectories = 500;
    sc.seed = 11;
    return generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  }();
  return ds;
}

LossConfig sine_loss() {
  LossConfig lc;
  lc.grid = SpectralGrid(1, 2, 64, 8);
  lc.alpha = 1.0;
  lc.g = {0.25};
  lc.nu = 10;
  return lc;
}

}  // namespace

TEST_CASE("training recovers the dominant sine mode and lowers the loss") {
  TrainConfig tc;
  tc.J = 2;
  tc.optimizer.max_iterations = 60;
  tc.optimizer.grad_tol = 1e-7;
  tc.optimizer.step_tol = 1e-7;
  int seen = 0;
  tc.on_iteration = [&](const IterationRecord&) { ++seen; };
  const auto r = train(sine_data(), sine_loss(), tc);
  CHECK(r.report.final_loss < 0.5 * r.report.initial_loss);
  CHECK(seen == static_cast<int>(r.report.history.size()));
  CHECK(r.report.parameters == 5);  // j = 0 real, j = 1 and j = 2 complex
  CHECK(r.model.reality_defect() == 0.0);
  CHECK(std::abs(r.model.coeff(MultiIndex{2, 0, 0}, 0) - cplx(0.0, -0.5)) < 0.05);
  CHECK(std::abs(r.model.coeff(MultiIndex{1, 0, 0}, 0)) < 0.05);
  CHECK(std::abs(r.model.coeff(MultiIndex{0, 0, 0}, 0)) < 0.05);
  CHECK(r.report.final_loss == doctest::Approx(mmd_loss(r.model, sine_data(), sine_loss())));

  const auto path = std::filesystem::temp_directory_path() / "cfid_report_test.csv";
  write_run_report_csv(r.report, path);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0, comments = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) == 0) {
      ++comments;
    } else if (!header) {
      header = true;
      CHECK(line.rfind("iteration,", 0) == 0);
    } else {
      ++rows;
    }
  }
  CHECK(comments > 0);
  CHECK(rows == r.report.history.size());
  std::filesystem::remove(path);
}

TEST_CASE("symmetry-constrained training stays in the subspace") {
  SimulationConfig sc;
  sc.g = {0.3, 0.3};
  sc.alpha = 1.5;
  sc.init = GaussianFirstInit{};
  sc.fine_step = 1e-2;
  sc.total_steps = 100;
  sc.save_stride = 20;
  sc.n_trajectories = 60;
  sc.seed = 4;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::maier_stein, 2), sc);
  LossConfig lc;
  lc.grid = SpectralGrid(2, 2, 8, 4);
  lc.alpha = 1.5;
  lc.g = {0.3, 0.3};
  lc.nu = 4;
  TrainConfig tc;
  tc.J = 2;
  tc.symmetry = SymmetrySpec::maier_stein();
  tc.optimizer.max_iterations = 8;
  const auto r = train(ds, lc, tc);
  const FourierDrift again = project_symmetry(r.model, tc.symmetry);
  for (std::size_t i = 0; i < again.coeffs().size(); ++i) {
    CHECK(std::abs(again.coeffs()[i] - r.model.coeffs()[i]) < 1e-14);
  }
  CHECK(r.report.final_loss <= r.report.initial_loss);
}

TEST_CASE("training configuration errors") {
  TrainConfig tc;
  tc.J = 9;  // 8 * 9 > 64
  CHECK_THROWS_AS(train(sine_data(), sine_loss(), tc), ConfigError);
  tc.J = 2;
  tc.initial = FourierDrift(1, 3, 2);
  CHECK_THROWS_AS(train(sine_data(), sine_loss(), tc), ConfigError);
  tc.initial = FourierDrift(1, 2, 3);
  CHECK_THROWS_AS(train(sine_data(), sine_loss(), tc), ConfigError);
  tc.initial.reset();
  tc.J = -1;
  CHECK_THROWS_AS(train(sine_data(), sine_loss(), tc), ConfigError);
}
