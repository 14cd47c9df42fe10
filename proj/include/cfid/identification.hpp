#pragma once

#include <span>
#include <vector>

#include "cfid/drift_model.hpp"
#include "cfid/propagator.hpp"
#include "cfid/simulator.hpp"
#include "cfid/spectral_grid.hpp"

namespace cfid {

enum class LossMode {
  averaged_ecf,    // one empirical CF per snapshot
  per_trajectory,  // every trajectory is its own target, losses averaged
};

/// How snapshot pairs are chained. Training always uses teacher_forced: the
/// forward state is rebuilt from data at t_j for every pair (t_j, t_j+1).
/// `chained` feeds each prediction into the next pair and is loss-only.
enum class Pairing { teacher_forced, chained };

LossMode parse_loss_mode(const std::string& name);
std::string to_string(LossMode mode);

struct LossConfig {
  LossMode mode = LossMode::averaged_ecf;
  Pairing pairing = Pairing::teacher_forced;
  double mu = 0.0;            // L1 weight
  double gaussian_reg = 0.0;  // applied to inputs and targets alike
  int nu = 1;                 // inner steps per observation interval
  SpectralGrid grid;
  double alpha = 1.0;
  std::vector<double> g;
  DecayConvention decay = DecayConvention::componentwise;
  /// 0 or 1 keeps every inner state for the backward pass; k > 1 keeps every
  /// k-th and recomputes the rest.
  int checkpoint_stride = 0;
  /// Pairs before this index are left out of the loss. With a point-mass
  /// start the first empirical CF is 1 on the whole grid, which the truncated
  /// grid cannot evolve faithfully; 1 drops that pair.
  std::size_t first_pair = 0;

  void validate() const;
};

/// Propagator settings for `model` on `ds` (h = dt / nu).
PropagatorConfig propagator_config(const FourierDrift& model, const Dataset& ds,
                                   const LossConfig& cfg);

struct GradientReport {
  double loss = 0.0;       // data term + mu * |theta|_1
  double data_loss = 0.0;  // data term only
  ComplexVector coefficient_grad;  // dL/dRe + i dL/dIm per coefficient
  std::vector<double> grad;        // over the free parameters (empty if none given)
  std::vector<double> pair_residuals;  // sqrt(sum |psi_pred - psi_target|^2) per pair
};

/// 1/2 sum |pred - target|^2 over the grid.
double residual_loss(std::span<const cplx> pred, std::span<const cplx> target);

/// Sum of complex moduli of every coefficient.
double l1_norm(const FourierDrift& model);

double mmd_loss(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg);

/// Loss and its adjoint gradient with respect to every coefficient, treating
/// the entries as independent.
GradientReport mmd_gradient(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg);

/// Real coordinates of the subspace of coefficient arrays that satisfy the
/// reality constraint and a SymmetrySpec. The basis is orthonormal in the
/// (Re, Im) inner product and each vector lives on one symmetry orbit.
class Parameterization {
 public:
  Parameterization(int dim, int J, int L, const SymmetrySpec& spec);

  std::size_t size() const { return basis_.size(); }
  int dim() const { return dim_; }
  int J() const { return J_; }
  int L() const { return L_; }
  const SymmetrySpec& symmetry() const { return spec_; }

  std::vector<double> pack(const FourierDrift& model) const;
  FourierDrift unpack(std::span<const double> params) const;
  /// Gradient over the parameters from a coefficient gradient.
  std::vector<double> pullback(std::span<const cplx> coefficient_grad) const;

 private:
  struct Entry {
    std::size_t index;
    cplx weight;
  };
  int dim_;
  int J_;
  int L_;
  SymmetrySpec spec_;
  std::vector<std::vector<Entry>> basis_;
};

/// Adds the L1 subgradient (mu theta/|theta|, zero at exact zeros) and pulls
/// the total back to the free parameters.
GradientReport mmd_gradient(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg,
                            const Parameterization& params);

/// theta = H(t): the sin x model scaled by 2t, i.e. theta^{+L} = -i t and
/// theta^{-L} = +i t, so H(0.5) is sin x itself.
FourierDrift sine_embedding(double t, int J, int L = 2);

}  // namespace cfid
