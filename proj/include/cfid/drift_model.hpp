#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "cfid/common.hpp"
#include "cfid/index_box.hpp"

namespace cfid {

enum class Parity { none, even, odd };

/// Per (component, axis) parity constraints on a vector field.
class SymmetrySpec {
 public:
  SymmetrySpec() = default;
  explicit SymmetrySpec(int dim);

  /// f_1 odd in x_1, even in x_2; f_2 even in x_1, odd in x_2.
  static SymmetrySpec maier_stein();

  /// Parses "m:axis:parity" triples separated by commas, 1-based, e.g.
  /// "1:1:odd,1:2:even". The string "none" yields an inactive spec.
  static SymmetrySpec parse(const std::string& text, int dim);

  int dim() const { return dim_; }
  Parity at(int component, int axis) const { return parity_[component * dim_ + axis]; }
  void set(int component, int axis, Parity p) { parity_[component * dim_ + axis] = p; }
  bool active() const;
  std::string to_string() const;

 private:
  int dim_ = 0;
  std::vector<Parity> parity_;
};

/// Truncated Fourier series drift
///   f_m(x) = sum_{j in Js} theta^j_m exp(i j.x / L),   Js = { |j_l| <= J }.
/// Coefficients are stored mode-major: coeff(mode, m) = coeffs()[mode * dim + m].
class FourierDrift {
 public:
  FourierDrift() = default;
  FourierDrift(int dim, int J, int L);

  int dim() const { return modes_.dim(); }
  int J() const { return modes_.radius(); }
  int L() const { return L_; }
  const IndexBox& modes() const { return modes_; }
  std::size_t num_modes() const { return modes_.size(); }

  cplx& coeff(std::size_t mode, int m) { return coeffs_[mode * dim() + m]; }
  const cplx& coeff(std::size_t mode, int m) const { return coeffs_[mode * dim() + m]; }
  cplx& coeff(const MultiIndex& j, int m) { return coeff(modes_.flatten(j), m); }
  const cplx& coeff(const MultiIndex& j, int m) const { return coeff(modes_.flatten(j), m); }

  std::span<cplx> coeffs() { return coeffs_; }
  std::span<const cplx> coeffs() const { return coeffs_; }

  /// Largest |theta^j_m - conj(theta^{-j}_m)|.
  double reality_defect() const;
  /// Sum of complex moduli of all coefficients.
  double l1_norm() const;

 private:
  IndexBox modes_;
  int L_ = 1;
  ComplexVector coeffs_;
};

/// Evaluates a real-valued FourierDrift at many points without re-checking the
/// reality constraint; the constraint is verified once at construction.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const FourierDrift& model);
  int dim() const { return dim_; }
  void operator()(std::span<const double> x, std::span<double> out) const;
  /// Jacobian d f_m / d x_l, row-major [m * dim + l].
  void jacobian(std::span<const double> x, std::span<double> out) const;

 private:
  int dim_;
  int J_;
  int L_;
  // Zero mode followed by the nonnegative half (each counted twice in the real form).
  std::vector<MultiIndex> indices_;
  std::vector<cplx> coeffs_;  // [term * dim + m]
  std::vector<double> weights_;
};

/// f(x) summed over every mode; the imaginary residue is checked against
/// 1e-12 (relative to the coefficient mass) and then dropped.
std::vector<double> evaluate_field(const FourierDrift& model, std::span<const double> x);

/// (theta * theta^T)^k = sum_j theta^j (theta^{k-j})^T for all |k_l| <= 2J.
/// Layout [k * dim * dim + m * dim + m'].
ComplexVector coefficient_convolution(const FourierDrift& model);

/// Orthogonal projection onto the reality constraint and the parities in `spec`.
FourierDrift project_symmetry(const FourierDrift& model, const SymmetrySpec& spec);

/// Applies the same projection to a flat coefficient-shaped array in place.
void project_symmetry_inplace(std::span<cplx> coeffs, const IndexBox& modes, int dim,
                              const SymmetrySpec& spec);

using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

struct QuadratureOptions {
  /// Gauss-Legendre panels per axis; 0 picks a default by dimension.
  int panels = 0;
  /// Max disagreement allowed between `panels` and `panels / 2`.
  double refinement_tol = 1e-8;
};

/// theta^j_m = (2 L pi)^-d int_{[-L pi, L pi]^d} f_m(x) exp(-i j.x / L) dx by
/// composite 8-point Gauss-Legendre with one halving check.
FourierDrift coefficients_by_quadrature(const VectorField& f, int J, int L, int dim,
                                        const QuadratureOptions& options = {});

void write_coefficients_csv(const FourierDrift& model, const std::filesystem::path& path);
FourierDrift read_coefficients_csv(const std::filesystem::path& path);

}  // namespace cfid
