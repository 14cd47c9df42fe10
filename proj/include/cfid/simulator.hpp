#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfid/drift_model.hpp"

namespace cfid {

enum class DriftKind {
  zero,
  linear,  // f(x) = -x, the Ornstein-Uhlenbeck drift
  sine1d,
  doublewell1d,
  trig_singlewell2d,
  trig_doublewell2d,
  poly_doublewell2d,
  maier_stein,
  fourier,
};

/// A ground-truth drift field: one of the built-in forms or a Fourier model.
class DriftSpec {
 public:
  DriftSpec(DriftKind kind, int dim);
  explicit DriftSpec(const FourierDrift& model);

  /// Built-in by name ("sine1d", "maier_stein", ...). `dim` is only used for
  /// the dimension-agnostic fields (zero, linear).
  static DriftSpec builtin(const std::string& name, int dim = 1);

  DriftKind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string name() const;
  const FourierDrift* fourier() const { return model_.get(); }

  void operator()(std::span<const double> x, std::span<double> out) const;
  VectorField as_field() const;

 private:
  DriftKind kind_;
  int dim_;
  std::shared_ptr<const FourierDrift> model_;
  std::shared_ptr<const FieldEvaluator> evaluator_;
};

struct PointInit {
  std::vector<double> x0;
};
/// First coordinate ~ N(mean, stddev^2), all others zero.
struct GaussianFirstInit {
  int dim = 2;
  double mean = 0.0;
  double stddev = 1.0 / 3.0;
};
/// Trajectory k starts at node k (mod n^d) of an equispaced n^d grid on [lo, hi]^d.
struct GridInit {
  int dim = 2;
  double lo = -1.0;
  double hi = 1.0;
  int per_axis = 10;
};
using InitialCondition = std::variant<PointInit, GaussianFirstInit, GridInit>;

int init_dim(const InitialCondition& init);
std::string describe(const InitialCondition& init);

struct Trajectory {
  std::vector<double> states;  // row-major, (rows x dim)
  bool valid = true;

  std::size_t rows(int dim) const { return states.size() / static_cast<std::size_t>(dim); }
  std::span<const double> state(std::size_t j, int dim) const {
    return {states.data() + j * dim, static_cast<std::size_t>(dim)};
  }
};

struct Dataset {
  int dim = 1;
  double dt = 0.0;
  std::size_t observations = 0;  // saved states per trajectory, N + 1
  std::vector<Trajectory> trajectories;
  std::map<std::string, std::string> provenance;

  std::size_t valid_count() const;
  /// Valid trajectories only, checked to share the full observation count.
  std::vector<const Trajectory*> valid_trajectories() const;
};

/// x + f(x) h + diag(g) noise. Non-finite results are returned as-is for the
/// caller to flag.
std::vector<double> euler_maruyama_step(std::span<const double> x, const DriftSpec& drift,
                                        std::span<const double> g, double h,
                                        std::span<const double> noise);

struct SimulationConfig {
  std::vector<double> g;
  double alpha = 1.0;
  InitialCondition init = PointInit{{0.0}};
  double fine_step = 1e-3;
  long long total_steps = 4001;
  long long save_stride = 100;
  std::size_t n_trajectories = 100;
  std::uint64_t seed = 1;
  /// Noise stream tag; different tags give independent noise for the same seed.
  std::uint64_t stream = 0;
};

/// Euler-Maruyama with saving every `save_stride` fine steps; floor(total /
/// stride) + 1 saved states, the initial state included.
Dataset generate_dataset(const DriftSpec& drift, const SimulationConfig& config);

/// Keeps the valid trajectories whose saved states all lie inside [lo, hi].
Dataset filter_box(const Dataset& ds, std::span<const double> lo, std::span<const double> hi);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace cfid
