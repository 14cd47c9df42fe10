#pragma once

#include <filesystem>
#include <span>

#include "cfid/common.hpp"
#include "cfid/index_box.hpp"
#include "cfid/simulator.hpp"

namespace cfid {

/// Equispaced frequency grid { j ds : |j_l| <= M } with ds = 1 / (n_L L).
class SpectralGrid {
 public:
  SpectralGrid() = default;
  SpectralGrid(int dim, int L, int M, int n_L);

  int dim() const { return box_.dim(); }
  int L() const { return L_; }
  int M() const { return box_.radius(); }
  int n_L() const { return n_L_; }
  double spacing() const { return 1.0 / (static_cast<double>(n_L_) * L_); }

  const IndexBox& box() const { return box_; }
  std::size_t size() const { return box_.size(); }
  std::size_t center() const { return box_.center(); }

  /// Frequency vector s = j ds of flat point p.
  std::array<double, kMaxDim> frequency(std::size_t p) const;

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    return a.box_ == b.box_ && a.L_ == b.L_ && a.n_L_ == b.n_L_;
  }

 private:
  IndexBox box_;
  int L_ = 1;
  int n_L_ = 1;
};

/// Complex field sampled on a SpectralGrid.
struct CFField {
  SpectralGrid grid;
  ComplexVector values;
  double time = 0.0;

  CFField() = default;
  explicit CFField(const SpectralGrid& g, double t = 0.0)
      : grid(g), values(g.size(), cplx{}), time(t) {}

  cplx at_center() const { return values[grid.center()]; }
};

/// (1/n) sum_k exp(i s.X^k_snapshot) over the valid trajectories, optionally
/// multiplied by exp(-gaussian_reg |s|^2).
CFField empirical_cf(const Dataset& ds, std::size_t snapshot_index, const SpectralGrid& grid,
                     double gaussian_reg = 0.0);

/// exp(i s.x - gaussian_reg |s|^2).
CFField per_trajectory_cf(std::span<const double> x, const SpectralGrid& grid,
                          double gaussian_reg = 0.0);

/// Writes j_1..j_d, s_1..s_d, real, imag per grid point.
void write_cf_csv(const CFField& field, const std::filesystem::path& path);

}  // namespace cfid
