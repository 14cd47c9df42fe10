// cfid: simulate, train, scan, eval, portrait, stability, oracle.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "cfid/config.hpp"
#include "cfid/evaluation.hpp"
#include "cfid/manifest.hpp"
#include "cfid/oracles.hpp"
#include "cfid/text_io.hpp"
#include "cfid/training.hpp"
#include "cfid/verification.hpp"

namespace fs = std::filesystem;
using namespace cfid;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out = ".";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "override one key, e.g. --set loss.nu=50");
  sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
}

Config load(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

RunManifest manifest_for(const std::string& command, const Common& common, const Config& cfg) {
  RunManifest m;
  m.command = command;
  m.created = utc_timestamp();
  if (!common.config.empty()) m.paths["config"] = common.config;
  for (const auto& k : config_schema()) m.config[k.name] = cfg.get(k.name);
  m.seeds["sim.seed"] = static_cast<std::uint64_t>(cfg.get_int("sim.seed"));
  m.seeds["eval.seed"] = static_cast<std::uint64_t>(cfg.get_int("eval.seed"));
  return m;
}

void finish(RunManifest& m, const fs::path& dir) {
  const fs::path path = dir / (m.command + "_manifest.json");
  write_manifest(m, path);
  std::cout << "manifest: " << path.string() << "\n";
}

int cmd_simulate(const Common& common, const std::string& dataset_name) {
  const Config cfg = load(common);
  const DriftSpec drift = drift_spec(cfg);
  const SimulationConfig sc = simulation_config(cfg);
  Dataset ds = generate_dataset(drift, sc);
  if (const std::string box = cfg.get("sim.filter_box"); !box.empty()) {
    const double b = cfg.get_double("sim.filter_box");
    const std::vector<double> lo(static_cast<std::size_t>(ds.dim), -b), hi(lo.size(), b);
    ds = filter_box(ds, lo, hi);
  }
  const fs::path dir = out_dir(common);
  const fs::path path = dir / dataset_name;
  write_dataset(ds, path);
  std::cout << "dataset: " << path.string() << " (" << ds.valid_count() << " of "
            << sc.n_trajectories << " trajectories valid, " << ds.observations
            << " saved states)\n";
  RunManifest m = manifest_for("simulate", common, cfg);
  m.paths["dataset"] = path.string();
  finish(m, dir);
  return 0;
}

int cmd_train(const Common& common, const std::string& dataset_path, bool progress) {
  const Config cfg = load(common);
  const Dataset ds = read_dataset(dataset_path);
  const LossConfig lc = loss_config(cfg, ds.dim);
  TrainConfig tc = train_config(cfg, ds.dim);
  if (progress) {
    tc.on_iteration = [](const IterationRecord& r) {
      std::fprintf(stderr, "iter %4d  loss %.10g  |g| %.3e  radius %.3e  %s\n", r.iteration,
                   r.loss, r.grad_norm, r.radius, r.accepted ? "accepted" : "rejected");
    };
  }
  const TrainResult result = train(ds, lc, tc);
  const fs::path dir = out_dir(common);
  const fs::path coeffs = dir / "coefficients.csv";
  const fs::path report = dir / "train_report.csv";
  write_coefficients_csv(result.model, coeffs);
  write_run_report_csv(result.report, report);
  std::cout << "termination: " << result.report.termination << "\n"
            << "loss: " << result.report.initial_loss << " -> " << result.report.final_loss
            << " in " << result.report.history.size() << " iterations ("
            << result.report.wall_seconds << " s)\n";
  for (const auto& w : result.report.warnings) std::cout << "warning: " << w << "\n";
  if (cfg.get("sim.drift") != "fourier" || !cfg.get("sim.fourier_coefficients").empty()) {
    std::cout << "coeff_mae: " << text::format_double(coeff_mae(result.model, truth_coefficients(cfg)))
              << "\n";
  }
  RunManifest m = manifest_for("train", common, cfg);
  m.paths["dataset"] = dataset_path;
  m.paths["coefficients"] = coeffs.string();
  m.paths["report"] = report.string();
  finish(m, dir);
  return 0;
}

int cmd_scan(const Common& common, const std::string& dataset_path) {
  const Config cfg = load(common);
  const Dataset ds = read_dataset(dataset_path);
  if (ds.dim != 1) throw ConfigError("the built-in scan embedding is 1D (sin x)");
  const LossConfig lc = loss_config(cfg, 1);
  const int J = static_cast<int>(cfg.get_int("train.J"));
  const int L = lc.grid.L();
  const auto scan = loss_scan(
      ds, [&](double t) { return sine_embedding(t, J, L); }, scan_settings(cfg).values(), lc);
  const fs::path dir = out_dir(common);
  const fs::path path = dir / "scan.csv";
  write_scan_csv(scan, path);
  const auto best = std::min_element(scan.begin(), scan.end(),
                                     [](const auto& a, const auto& b) { return a.loss < b.loss; });
  std::cout << "argmin theta: " << text::format_double(best->theta)
            << "  loss: " << text::format_double(best->loss) << "\n";
  RunManifest m = manifest_for("scan", common, cfg);
  m.paths["dataset"] = dataset_path;
  m.paths["report"] = path.string();
  finish(m, dir);
  return 0;
}

int cmd_eval(const Common& common, const std::string& coeff_path) {
  const Config cfg = load(common);
  const FourierDrift learned = read_coefficients_csv(coeff_path);
  EvalReport rep;
  const FourierDrift truth = truth_coefficients(cfg);
  if (truth.J() == learned.J() && truth.L() == learned.L() && truth.dim() == learned.dim()) {
    rep.coeff_mae = coeff_mae(learned, truth);
  } else {
    std::cout << "coeff_mae skipped: train.J / grid.L differ from the coefficient file\n";
  }
  const long long n_test = cfg.get_int("eval.n_test");
  if (n_test > 0) {
    const EvalReport traj =
        trajectory_test_error(learned, drift_spec(cfg), simulation_config(cfg),
                              static_cast<std::size_t>(n_test),
                              static_cast<std::uint64_t>(cfg.get_int("eval.seed")));
    const auto mae = rep.coeff_mae;
    rep = traj;
    rep.coeff_mae = mae;
  }
  const fs::path dir = out_dir(common);
  const fs::path path = dir / "eval.csv";
  write_eval_report(rep, path);
  if (rep.coeff_mae) std::cout << "coeff_mae: " << text::format_double(*rep.coeff_mae) << "\n";
  if (n_test > 0) {
    std::cout << "mmae: " << rep.learned.mmae << "  miqr: " << rep.learned.miqr << "\n"
              << "reference mmae: " << rep.reference.mmae << "  miqr: " << rep.reference.miqr
              << "\n"
              << "shared-noise mmae: " << rep.shared_noise.mmae << "\n"
              << "dropped: " << rep.dropped_trajectories << " of " << n_test << "\n";
  }
  RunManifest m = manifest_for("eval", common, cfg);
  m.paths["coefficients"] = coeff_path;
  m.paths["report"] = path.string();
  finish(m, dir);
  return 0;
}

int cmd_portrait(const Common& common, const std::string& coeff_path) {
  const Config cfg = load(common);
  const PortraitSettings ps = portrait_settings(cfg);
  const PhasePortrait P = phase_portrait(read_coefficients_csv(coeff_path), ps.lo, ps.hi, ps.resolution);
  const fs::path dir = out_dir(common);
  const fs::path field = dir / "portrait.csv";
  const fs::path points = dir / "fixed_points.csv";
  write_portrait_csv(P, field);
  write_fixed_points_csv(P, points);
  if (P.degenerate) {
    std::cout << "fixed points: degenerate (every cell changes sign)\n";
  } else {
    for (const auto& fp : P.fixed_points) {
      std::cout << "fixed point candidate (" << fp.x[0] << ", " << fp.x[1] << ") "
                << to_string(fp.kind) << "\n";
    }
  }
  RunManifest m = manifest_for("portrait", common, cfg);
  m.paths["coefficients"] = coeff_path;
  m.paths["portrait"] = field.string();
  m.paths["fixed_points"] = points.string();
  finish(m, dir);
  return 0;
}

int cmd_stability(const Common& common, double g, double alpha) {
  const Config cfg = load(common);
  const double w = stability_margin(g, alpha);
  if (std::isinf(w)) {
    std::cout << "no finite stability boundary (|Phi(w)| <= 1 for all w)\n";
  } else {
    std::printf("%.6f\n", w);
  }
  RunManifest m = manifest_for("stability", common, cfg);
  finish(m, out_dir(common));
  return 0;
}

int cmd_oracle(const Common& common, std::uint64_t seed) {
  const Config cfg = load(common);
  bool all = true;
  for (const auto& c : run_oracle_suite(seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.passed;
  }
  RunManifest m = manifest_for("oracle", common, cfg);
  finish(m, out_dir(common));
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift identification for SDEs driven by alpha-stable noise"};
  app.require_subcommand(1);

  Common common;
  std::string dataset_name = "dataset.txt", dataset, coefficients;
  bool progress = false;
  double g = 0.0, alpha = 1.0;
  std::uint64_t seed = 1;

  auto* sim = app.add_subcommand("simulate", "generate a trajectory dataset");
  add_common(sim, common);
  sim->add_option("--name", dataset_name, "dataset file name")->capture_default_str();

  auto* tr = app.add_subcommand("train", "fit Fourier drift coefficients");
  add_common(tr, common);
  tr->add_option("-d,--dataset", dataset, "dataset file")->required()->check(CLI::ExistingFile);
  tr->add_flag("--progress", progress, "print every iteration to stderr");

  auto* sc = app.add_subcommand("scan", "loss along the sin x embedding H(t)");
  add_common(sc, common);
  sc->add_option("-d,--dataset", dataset, "dataset file")->required()->check(CLI::ExistingFile);

  auto* ev = app.add_subcommand("eval", "coefficient MAE and trajectory MMAE/MIQR");
  add_common(ev, common);
  ev->add_option("-m,--coefficients", coefficients, "coefficient CSV")
      ->required()
      ->check(CLI::ExistingFile);

  auto* po = app.add_subcommand("portrait", "2D field samples and fixed-point candidates");
  add_common(po, common);
  po->add_option("-m,--coefficients", coefficients, "coefficient CSV")
      ->required()
      ->check(CLI::ExistingFile);

  auto* st = app.add_subcommand("stability", "stability boundary w* = h ds");
  add_common(st, common);
  st->add_option("--g", g, "diffusion constant")->required()->check(CLI::PositiveNumber);
  st->add_option("--alpha", alpha, "stability index")->capture_default_str();

  auto* orc = app.add_subcommand("oracle", "run the analytic verification suite");
  add_common(orc, common);
  orc->add_option("--seed", seed, "seed")->capture_default_str();

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, dataset_name);
    if (tr->parsed()) return cmd_train(common, dataset, progress);
    if (sc->parsed()) return cmd_scan(common, dataset);
    if (ev->parsed()) return cmd_eval(common, coefficients);
    if (po->parsed()) return cmd_portrait(common, coefficients);
    if (st->parsed()) return cmd_stability(common, g, alpha);
    if (orc->parsed()) return cmd_oracle(common, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
