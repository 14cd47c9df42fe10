#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfid/identification.hpp"
#include "cfid/simulator.hpp"

namespace cfid {

/// Mean over every (mode, component) of |learned - truth|.
double coeff_mae(const FourierDrift& learned, const FourierDrift& truth);

struct ScanPoint {
  double theta = 0.0;
  double loss = 0.0;
};

using Embedding = std::function<FourierDrift(double)>;

/// Loss of embedding(t) for every t. Empirical CFs are built once.
std::vector<ScanPoint> loss_scan(const Dataset& ds, const Embedding& embedding,
                                 const std::vector<double>& theta_values, const LossConfig& cfg);

void write_scan_csv(const std::vector<ScanPoint>& scan, const std::filesystem::path& path);

struct TrajectoryError {
  double mmae = 0.0;
  double miqr = 0.0;
};

struct EvalReport {
  std::optional<double> coeff_mae;
  /// Reference set vs learned-drift set, independent noise.
  TrajectoryError learned;
  /// Reference set vs a second ground-truth set, independent noise.
  TrajectoryError reference;
  /// Reference set vs learned drift driven by the reference noise. Diagnostic only.
  TrajectoryError shared_noise;
  std::size_t used_trajectories = 0;
  std::size_t dropped_trajectories = 0;
  std::string pairing_note;
};

/// Median over trajectories of the per-trajectory median (MMAE) and IQR (MIQR)
/// of |a_j - b_j| over the saved times j >= 1. Index k of `a` is paired with
/// index k of `b`; a pair is skipped when either side is invalid.
TrajectoryError paired_error(const Dataset& a, const Dataset& b);

/// Simulates three test sets from the point x0 = 0 using `sim` for step sizes,
/// alpha and g: the reference and a second set with the true drift, and one
/// with the learned drift, each with its own noise. An index is dropped from
/// every comparison when any of the sets overflowed there.
EvalReport trajectory_test_error(const FourierDrift& learned, const DriftSpec& truth,
                                 const SimulationConfig& sim, std::size_t n_test,
                                 std::uint64_t seed);

void write_eval_report(const EvalReport& report, const std::filesystem::path& path);

enum class FixedPointKind { stable, unstable, saddle, center_or_degenerate };
std::string to_string(FixedPointKind kind);

struct FixedPointCandidate {
  std::array<double, 2> x{};
  FixedPointKind kind = FixedPointKind::center_or_degenerate;
  std::size_t cells = 0;  // sign-change cells merged into this candidate
};

struct PhasePortrait {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  int resolution = 0;
  std::vector<double> f1;  // [i * resolution + k] at (x1_i, x2_k)
  std::vector<double> f2;
  /// Every cell changes sign in both components, e.g. the zero field. No
  /// candidates are listed in that case.
  bool degenerate = false;
  std::vector<FixedPointCandidate> fixed_points;

  double x1(int i) const;
  double x2(int k) const;
};

/// Samples a 2D model on a resolution x resolution grid over [lo, hi] and
/// lists cells where both components change sign. Adjacent flagged cells are
/// merged; each candidate is classified by the Jacobian at its centroid.
PhasePortrait phase_portrait(const FourierDrift& model, std::array<double, 2> lo,
                             std::array<double, 2> hi, int resolution);

/// x1,x2,f1,f2 with x1 the slow index.
void write_portrait_csv(const PhasePortrait& portrait, const std::filesystem::path& path);
void write_fixed_points_csv(const PhasePortrait& portrait, const std::filesystem::path& path);

}  // namespace cfid
