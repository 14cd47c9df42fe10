#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfid/identification.hpp"
#include "cfid/optimizer.hpp"

namespace cfid {

struct TrainConfig {
  int J = 4;
  SymmetrySpec symmetry;  // empty: reality constraint only
  OptimizerOptions optimizer;
  std::optional<FourierDrift> initial;  // zeros when unset
  /// Recorded in reports; training itself draws no random numbers.
  std::uint64_t seed = 0;
  /// Called after every iteration, e.g. for progress output.
  IterationCallback on_iteration;
};

struct RunReport {
  std::vector<IterationRecord> history;
  std::string termination;
  std::vector<std::string> warnings;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  int evaluations = 0;
  std::size_t parameters = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  FourierDrift model;
  RunReport report;
};

/// Fits a FourierDrift (J from `train`, L from the loss grid) by minimizing the
/// regularized loss over the symmetry-constrained free parameters.
TrainResult train(const Dataset& ds, const LossConfig& loss, const TrainConfig& train);

/// Header comments with the summary, then one row per iteration.
void write_run_report_csv(const RunReport& report, const std::filesystem::path& path);

}  // namespace cfid
