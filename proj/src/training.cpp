#include "cfid/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "cfid/objective.hpp"
#include "cfid/text_io.hpp"

namespace cfid {

TrainResult train(const Dataset& ds, const LossConfig& loss_cfg, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.J < 0) throw ConfigError("J must be >= 0");
  const SpectralGrid& grid = loss_cfg.grid;
  if (grid.n_L() * cfg.J > grid.M()) {
    throw ConfigError("n_L * J = " + std::to_string(grid.n_L() * cfg.J) +
                      " exceeds the grid half-width M = " + std::to_string(grid.M()));
  }
  const MmdObjective objective(ds, loss_cfg);
  const Parameterization params(ds.dim, cfg.J, grid.L(),
                                cfg.symmetry.dim() == 0 ? SymmetrySpec(ds.dim) : cfg.symmetry);

  FourierDrift initial(ds.dim, cfg.J, grid.L());
  if (cfg.initial) {
    if (cfg.initial->dim() != ds.dim || cfg.initial->J() != cfg.J || cfg.initial->L() != grid.L()) {
      throw ConfigError("initial model shape does not match J, L and the dataset dimension");
    }
    initial = *cfg.initial;
  }

  const SymmetrySpec& spec = params.symmetry();
  auto to_model = [&](std::span<const double> x) {
    return project_symmetry(params.unpack(x), spec);
  };

  SmoothObjective f = [&](std::span<const double> x, std::vector<double>& grad) {
    try {
      const GradientReport r = objective.gradient(to_model(x), params);
      grad = r.grad;
      return r.loss;
    } catch (const InstabilityError&) {
      // Rejected trial point; the trust region shrinks around the last iterate.
      grad.assign(x.size(), 0.0);
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::vector<double> x0 = params.pack(project_symmetry(initial, spec));
  const OptimizerResult opt = minimize_trust_sr1(f, x0, cfg.optimizer, cfg.on_iteration);

  TrainResult out{to_model(opt.x), {}};
  RunReport& rep = out.report;
  rep.history = opt.history;
  rep.termination = to_string(opt.reason);
  rep.warnings = opt.warnings;
  rep.final_loss = opt.f;
  rep.final_grad_norm = 0.0;
  for (double v : opt.grad) rep.final_grad_norm += v * v;
  rep.final_grad_norm = std::sqrt(rep.final_grad_norm);
  rep.evaluations = opt.evaluations;
  rep.parameters = params.size();
  rep.initial_loss = objective.loss(to_model(x0));
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_run_report_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  using text::format_double;
  out << "# termination=" << report.termination << '\n'
      << "# initial_loss=" << format_double(report.initial_loss) << '\n'
      << "# final_loss=" << format_double(report.final_loss) << '\n'
      << "# final_grad_norm=" << format_double(report.final_grad_norm) << '\n'
      << "# evaluations=" << report.evaluations << '\n'
      << "# parameters=" << report.parameters << '\n'
      << "# wall_seconds=" << format_double(report.wall_seconds) << '\n';
  for (const auto& w : report.warnings) out << "# warning=" << w << '\n';
  out << "iteration,loss,grad_norm,radius,step_norm,rho,accepted,update,seconds\n";
  for (const auto& r : report.history) {
    out << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.radius) << ',' << format_double(r.step_norm) << ','
        << format_double(r.rho) << ',' << (r.accepted ? 1 : 0) << ',' << r.update << ','
        << format_double(r.seconds) << '\n';
  }
}

}  // namespace cfid
