#include "cfid/verification.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cfid/identification.hpp"
#include "cfid/objective.hpp"
#include "cfid/oracles.hpp"
#include "cfid/propagator.hpp"

namespace cfid {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

OracleCheck drift_free_check() {
  PropagatorConfig cfg;
  cfg.alpha = 1.5;
  cfg.g = {0.8};
  cfg.h = 1e-3;
  cfg.grid = SpectralGrid(1, 2, 256, 8);
  cfg.model = FourierDrift(1, 2, 2);
  CFField psi(cfg.grid);
  std::fill(psi.values.begin(), psi.values.end(), cplx(1.0, 0.0));
  const CFField out = evolve(psi, cfg, 1000, false).final;
  double err = 0.0;
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    const double s = cfg.grid.frequency(p)[0];
    err = std::max(err, std::abs(out.values[p] - std::exp(-std::pow(std::abs(0.8 * s), 1.5))));
  }
  return {"drift_free_closed_form", err <= 1e-12, "sup error " + fmt(err) + " at t = 1"};
}

OracleCheck ou_check(std::uint64_t seed) {
  const auto r = ou_monte_carlo_study({4e-3, 2e-3, 1e-3}, 1.0, 0.5, 1.0, 20000, seed);
  const double q1 = r.em_error[0] / r.em_error[1];
  const double q2 = r.em_error[1] / r.em_error[2];
  const bool ok = q1 > 1.6 && q1 < 2.5 && q2 > 1.6 && q2 < 2.5 && r.exact_error <= r.mc_tolerance;
  return {"ou_first_order", ok,
          "error ratios " + fmt(q1) + ", " + fmt(q2) + "; exact-sample error " +
              fmt(r.exact_error) + " (tolerance " + fmt(r.mc_tolerance) + ")"};
}

OracleCheck bessel_check(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  PropagatorConfig cfg;
  cfg.alpha = 1.0;
  cfg.g = {0.25};
  cfg.h = 1e-3;
  cfg.grid = SpectralGrid(1, 2, 1028, 8);
  cfg.model = sine_embedding(0.5, 4, 2);
  CFField psi(cfg.grid);
  for (auto& v : psi.values) v = cplx(u(rng), u(rng));
  const CFField a = step(psi, cfg);
  const CFField b = sine_kernel_reference(psi, cfg.h, 0.25, 1.0);
  double err = 0.0;
  for (std::size_t p = 0; p < a.values.size(); ++p) err = std::max(err, std::abs(a.values[p] - b.values[p]));
  return {"bessel_kernel", err <= 1e-12, "max difference " + fmt(err)};
}

OracleCheck gradient_check(std::uint64_t seed) {
  SimulationConfig sc;
  sc.g = {0.5};
  sc.alpha = 1.5;
  sc.init = PointInit{{0.2}};
  sc.fine_step = 1e-2;
  sc.save_stride = 10;
  sc.total_steps = 30;
  sc.n_trajectories = 3;
  sc.seed = seed;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  LossConfig cfg;
  cfg.nu = 3;
  cfg.grid = SpectralGrid(1, 2, 32, 4);
  cfg.alpha = 1.5;
  cfg.g = {0.5};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.4);
  const Parameterization params(1, 2, 2, SymmetrySpec(1));
  std::vector<double> x(params.size());
  for (double& v : x) v = n(rng);
  const MmdObjective obj(ds, cfg);
  const auto adj = obj.gradient(params.unpack(x), params).grad;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (obj.loss(params.unpack(xp)) - obj.loss(params.unpack(xm))) / 2e-6;
    num += (fd - adj[i]) * (fd - adj[i]);
    den += fd * fd;
  }
  const double rel = std::sqrt(num / std::max(den, 1e-300));
  return {"adjoint_gradient", rel <= 1e-6, "relative error " + fmt(rel)};
}

OracleCheck stability_check() {
  const double w = stability_margin(0.1, 1.0);
  const bool ok = std::abs(w - 0.955) <= 0.005 && std::isinf(stability_margin(1.0, 1.0));
  return {"stability_boundary", ok, "w* = " + fmt(w) + " for g = 0.1, none for g = 1"};
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed) {
  return {drift_free_check(), ou_check(seed), bessel_check(seed), gradient_check(seed),
          stability_check()};
}

}  // namespace cfid
