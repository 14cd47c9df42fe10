#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfid/drift_model.hpp"
#include "cfid/spectral_grid.hpp"

namespace cfid {

/// How the diffusion factor E(j) of one step is formed, with s = j ds:
///   componentwise   exp(-h sum_l |s_l g_l|^alpha)   (independent noise components)
///   inner_product   exp(-h |s.g|^alpha)
///   printed_scheme  exp(-h ds |j.g|^alpha)
/// All three agree when d = 1 and alpha = 1.
enum class DecayConvention { componentwise, inner_product, printed_scheme };

DecayConvention parse_decay_convention(const std::string& name);
std::string to_string(DecayConvention convention);

/// max |psi| above this aborts an evolution.
inline constexpr double kInstabilityThreshold = 1e3;

struct PropagatorConfig {
  double alpha = 1.0;
  std::vector<double> g;  // constant diffusion, one entry per axis
  double h = 1e-3;
  SpectralGrid grid;
  FourierDrift model;
  DecayConvention decay = DecayConvention::componentwise;
};

/// One step of the fully discrete characteristic-function scheme,
///   psi'(j) = E(j) [ psi(j) + i w j.sum_k theta^k psi(j + k n_L)
///                    - w^2/2 j^T (sum_k (theta*theta^T)^k psi(j + k n_L)) j ],
/// w = h ds, with psi = 0 off the grid. The step is linear in psi; the
/// per-point coefficients of every shift are precomputed once per model.
class Propagator {
 public:
  explicit Propagator(const PropagatorConfig& config);

  const PropagatorConfig& config() const { return config_; }
  const SpectralGrid& grid() const { return config_.grid; }
  double w() const { return w_; }

  /// Advisory only: set when h ds exceeds the idealized stability margin.
  const std::optional<std::string>& stability_warning() const { return warning_; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  /// out = P^H in.
  void apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const;

  /// Storage needed for accumulate_sensitivity.
  std::size_t sensitivity_size() const { return grid_size_ * num_shifts_; }
  /// sens[p, k] += conj(lambda_next[p]) psi_prev[p + k n_L].
  void accumulate_sensitivity(std::span<const cplx> lambda_next, std::span<const cplx> psi_prev,
                              std::span<cplx> sens) const;
  /// Converts accumulated sensitivities into dL/dRe(theta) + i dL/dIm(theta),
  /// laid out like FourierDrift::coeffs().
  ComplexVector coefficient_gradient(std::span<const cplx> sens) const;

  /// E(j) at flat grid point p.
  double decay(std::size_t p) const { return decay_[p]; }

 private:
  template <int Sign, class F>
  void for_each_shift(std::size_t p, F&& f) const;

  PropagatorConfig config_;
  double w_;
  std::size_t grid_size_;
  IndexBox shifts_;  // convolution modes |k_l| <= 2J
  std::size_t num_shifts_;
  std::vector<double> decay_;
  ComplexVector stencil_;  // [p * num_shifts + k]
  std::optional<std::string> warning_;
};

/// Dense record of every state of an evolution, initial state included.
struct AdjointTape {
  std::vector<ComplexVector> states;
};

CFField step(const CFField& psi, const PropagatorConfig& config);

struct EvolveResult {
  CFField final;
  std::optional<AdjointTape> tape;
};

/// Applies `nu` steps; throws InstabilityError naming the step when max|psi|
/// exceeds kInstabilityThreshold or turns non-finite.
EvolveResult evolve(const CFField& psi0, const PropagatorConfig& config, int nu, bool record);
EvolveResult evolve(const CFField& psi0, const Propagator& propagator, int nu, bool record);

/// Throws InstabilityError if `values` left the admissible range.
void check_stable(std::span<const cplx> values, int step);

}  // namespace cfid
