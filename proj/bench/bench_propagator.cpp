// OpenMP stencil kernel vs the literal serial step, plus one full gradient.

#include <benchmark/benchmark.h>

#include <random>

#include "cfid/identification.hpp"
#include "cfid/objective.hpp"
#include "cfid/propagator.hpp"
#include "cfid/reference.hpp"

using namespace cfid;

namespace {

PropagatorConfig config(int dim, int M, int J) {
  PropagatorConfig c;
  c.alpha = 1.0;
  c.g.assign(static_cast<std::size_t>(dim), 0.25);
  c.h = 1e-3;
  c.grid = SpectralGrid(dim, 2, M, dim == 1 ? 8 : 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  FourierDrift m(dim, J, 2);
  for (auto& v : m.coeffs()) v = cplx(n(rng), n(rng));
  c.model = project_symmetry(m, SymmetrySpec(dim));
  return c;
}

CFField field(const SpectralGrid& grid) {
  CFField f(grid);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& v : f.values) v = cplx(u(rng), u(rng));
  return f;
}

void BM_apply(benchmark::State& st, int dim, int M) {
  const auto cfg = config(dim, M, 4);
  const Propagator prop(cfg);
  const CFField psi = field(cfg.grid);
  ComplexVector out(psi.values.size());
  for (auto _ : st) {
    prop.apply(psi.values, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(psi.values.size()));
}

void BM_reference(benchmark::State& st, int dim, int M) {
  const auto cfg = config(dim, M, 4);
  const CFField psi = field(cfg.grid);
  for (auto _ : st) {
    CFField out = reference::step(psi, cfg);
    benchmark::DoNotOptimize(out.values.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long long>(psi.values.size()));
}

void BM_gradient_sine(benchmark::State& st) {
  SimulationConfig sc;
  sc.g = {0.25};
  sc.alpha = 1.0;
  sc.fine_step = 1e-3;
  sc.total_steps = 1000;
  sc.save_stride = 100;
  sc.n_trajectories = 100;
  const Dataset ds = generate_dataset(DriftSpec(DriftKind::sine1d, 1), sc);
  LossConfig lc;
  lc.nu = 100;
  lc.grid = SpectralGrid(1, 2, 1028, 8);
  lc.alpha = 1.0;
  lc.g = {0.25};
  const MmdObjective obj(ds, lc);
  const FourierDrift model = sine_embedding(0.4, 4, 2);
  for (auto _ : st) benchmark::DoNotOptimize(obj.gradient(model).loss);
}

}  // namespace

BENCHMARK_CAPTURE(BM_apply, 1d_M1028, 1, 1028);
BENCHMARK_CAPTURE(BM_reference, 1d_M1028, 1, 1028);
BENCHMARK_CAPTURE(BM_apply, 2d_M33, 2, 33);
BENCHMARK_CAPTURE(BM_reference, 2d_M33, 2, 33);
BENCHMARK(BM_gradient_sine)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
