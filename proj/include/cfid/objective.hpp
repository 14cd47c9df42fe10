#pragma once

#include <utility>
#include <vector>

#include "cfid/identification.hpp"

namespace cfid {

/// Loss and gradient of one dataset under one LossConfig. Averaged empirical
/// CFs are computed once at construction, so repeated evaluations (as in
/// training or a scan) only pay for propagation.
class MmdObjective {
 public:
  MmdObjective(const Dataset& ds, const LossConfig& cfg);
  MmdObjective(const MmdObjective&) = delete;
  MmdObjective& operator=(const MmdObjective&) = delete;

  const LossConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return ds_; }
  std::size_t pairs() const;

  double loss(const FourierDrift& model) const;
  GradientReport gradient(const FourierDrift& model) const;
  GradientReport gradient(const FourierDrift& model, const Parameterization& params) const;

  /// Initial condition and target of work item `index` (one per pair, or one
  /// per pair and trajectory in per_trajectory mode).
  std::pair<CFField, CFField> item(std::size_t index) const;
  std::size_t items() const { return items_; }

 private:
  GradientReport evaluate(const FourierDrift& model, bool want_grad) const;
  double chained_loss(const Propagator& prop) const;
  std::size_t pair_of(std::size_t index) const;

  Dataset ds_;
  LossConfig cfg_;
  std::vector<const Trajectory*> trajectories_;
  std::vector<CFField> targets_;
  std::size_t items_ = 0;
  double weight_ = 1.0;
};

}  // namespace cfid
