#include "cfid/spectral_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cfid/text_io.hpp"

namespace cfid {

SpectralGrid::SpectralGrid(int dim, int L, int M, int n_L) : box_(dim, M), L_(L), n_L_(n_L) {
  if (L < 1) throw ConfigError("grid L must be positive");
  if (M < 1) throw ConfigError("grid M must be positive");
  if (n_L < 1) throw ConfigError("grid n_L must be positive");
}

std::array<double, kMaxDim> SpectralGrid::frequency(std::size_t p) const {
  const auto j = box_.unflatten(p);
  std::array<double, kMaxDim> s{};
  const double ds = spacing();
  for (int axis = 0; axis < dim(); ++axis) s[axis] = j[axis] * ds;
  return s;
}

namespace {

// Fills the nonnegative half directly and mirrors the rest by conjugation, so
// conjugate symmetry holds bit-for-bit.
template <class PointValue>
void fill_conjugate_symmetric(CFField& field, PointValue&& value) {
  const std::size_t n = field.grid.size();
  const std::size_t c = field.grid.center();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pp = static_cast<std::ptrdiff_t>(c); pp < static_cast<std::ptrdiff_t>(n);
       ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    const cplx v = value(p);
    field.values[p] = v;
    field.values[field.grid.box().mirror(p)] = std::conj(v);
  }
  field.values[c] = cplx(field.values[c].real(), 0.0);
}

double squared_norm(const std::array<double, kMaxDim>& s, int dim) {
  double r = 0.0;
  for (int a = 0; a < dim; ++a) r += s[a] * s[a];
  return r;
}

}  // namespace

CFField empirical_cf(const Dataset& ds, std::size_t snapshot_index, const SpectralGrid& grid,
                     double gaussian_reg) {
  if (ds.dim != grid.dim()) throw ConfigError("dataset and grid dimensions differ");
  if (snapshot_index >= ds.observations) throw ConfigError("snapshot index out of range");
  if (gaussian_reg < 0.0) throw DomainError("gaussian_reg must be non-negative");
  const auto trajectories = ds.valid_trajectories();
  if (trajectories.empty()) throw EmptyDatasetError("empirical_cf: no valid trajectories");

  const int d = ds.dim;
  // Sorted so the floating-point sum does not depend on trajectory order.
  std::vector<std::array<double, kMaxDim>> sorted;
  sorted.reserve(trajectories.size());
  for (const auto* t : trajectories) {
    const auto x = t->state(snapshot_index, d);
    std::array<double, kMaxDim> row{};
    std::copy(x.begin(), x.end(), row.begin());
    sorted.push_back(row);
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> points;
  points.reserve(sorted.size() * static_cast<std::size_t>(d));
  for (const auto& row : sorted) points.insert(points.end(), row.begin(), row.begin() + d);
  const double inv_n = 1.0 / static_cast<double>(trajectories.size());

  CFField field(grid, static_cast<double>(snapshot_index) * ds.dt);
  fill_conjugate_symmetric(field, [&](std::size_t p) {
    const auto s = grid.frequency(p);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += s[a] * points[k * d + a];
      re += std::cos(phase);
      im += std::sin(phase);
    }
    const double damp = gaussian_reg > 0.0 ? std::exp(-gaussian_reg * squared_norm(s, d)) : 1.0;
    return cplx(re * inv_n * damp, im * inv_n * damp);
  });
  field.values[grid.center()] = cplx(1.0, 0.0);
  return field;
}

CFField per_trajectory_cf(std::span<const double> x, const SpectralGrid& grid,
                          double gaussian_reg) {
  if (static_cast<int>(x.size()) != grid.dim()) throw ConfigError("state/grid dimension mismatch");
  if (gaussian_reg < 0.0) throw DomainError("gaussian_reg must be non-negative");
  const int d = grid.dim();
  CFField field(grid);
  fill_conjugate_symmetric(field, [&](std::size_t p) {
    const auto s = grid.frequency(p);
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += s[a] * x[a];
    const double mag = gaussian_reg > 0.0 ? std::exp(-gaussian_reg * squared_norm(s, d)) : 1.0;
    return std::polar(mag, phase);
  });
  return field;
}

void write_cf_csv(const CFField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const int d = field.grid.dim();
  for (int a = 0; a < d; ++a) out << "j" << a + 1 << ',';
  for (int a = 0; a < d; ++a) out << "s" << a + 1 << ',';
  out << "real,imag\n";
  for (std::size_t p = 0; p < field.grid.size(); ++p) {
    const auto j = field.grid.box().unflatten(p);
    const auto s = field.grid.frequency(p);
    for (int a = 0; a < d; ++a) out << j[a] << ',';
    for (int a = 0; a < d; ++a) out << text::format_double(s[a]) << ',';
    out << text::format_double(field.values[p].real()) << ','
        << text::format_double(field.values[p].imag()) << '\n';
  }
}

}  // namespace cfid
