#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cfid {

struct OptimizerOptions {
  double grad_tol = 1e-9;  // stop when ||g||_2 <= grad_tol
  double step_tol = 1e-9;  // stop when the trust radius falls below this
  int max_iterations = 200;
  double initial_radius = 1.0;
  double max_radius = 1e4;
  double eta = 1e-4;  // minimum actual/predicted reduction ratio to accept
  /// Iterations without a new best value before a warning is recorded.
  int patience = 10;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;  // at the current iterate, after this iteration
  double grad_norm = 0.0;
  double radius = 0.0;
  double step_norm = 0.0;
  double rho = 0.0;
  bool accepted = false;
  /// "sr1", "bfgs" (SR1 denominator rejected, BFGS used instead) or "none".
  std::string update;
  double seconds = 0.0;  // wall time since start
};

enum class Termination { gradient_tolerance, step_tolerance, max_iterations };
std::string to_string(Termination t);

struct OptimizerResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> grad;
  std::vector<IterationRecord> history;
  Termination reason = Termination::max_iterations;
  int evaluations = 0;
  std::vector<std::string> warnings;
};

/// Returns f(x) and fills grad. May return +infinity to reject a trial point.
using SmoothObjective = std::function<double(std::span<const double> x, std::vector<double>& grad)>;
using IterationCallback = std::function<void(const IterationRecord&)>;

/// Trust-region quasi-Newton minimization with SR1 updates and a Steihaug
/// truncated-CG subproblem. When the SR1 denominator safeguard rejects an
/// update, a BFGS update is applied instead if the curvature condition holds.
OptimizerResult minimize_trust_sr1(const SmoothObjective& f, std::vector<double> x0,
                                   const OptimizerOptions& options,
                                   const IterationCallback& on_iteration = {});

/// Approximately minimizes g.s + 1/2 s.B s over ||s|| <= radius. CG stops once
/// ||B s + g|| <= min(0.5, sqrt||g||) ||g|| (or tol), so only small gradients
/// get a near-exact Newton step.
std::vector<double> steihaug_cg(std::span<const double> B, std::span<const double> g,
                                double radius, double tol = 1e-10, int max_iter = 0);

}  // namespace cfid
