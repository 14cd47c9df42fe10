#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cfid/common.hpp"

namespace cfid {

/// Symmetric, centred alpha-stable law: CF exp(-|scale * s|^alpha).
struct StableSpec {
  double alpha = 1.0;
  double scale = 1.0;

  StableSpec(double alpha, double scale);
};

/// Random stream keyed by (seed, stream, substream). Two streams with distinct
/// keys are independent; the same key always reproduces the same sequence, no
/// matter which thread draws from it.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

  /// Uniform on the open interval (0, 1), built from 53 random bits.
  double uniform();
  /// Standard exponential.
  double exponential();
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Throws DomainError unless 1 <= alpha <= 2.
void check_alpha(double alpha);

/// One standard (scale 1) symmetric alpha-stable variate via Chambers-Mallows-Stuck.
double standard_stable(double alpha, StreamRng& rng);

/// One variate from `spec`.
double sample_stable(const StableSpec& spec, StreamRng& rng);

/// count x dim i.i.d. increments of the alpha-stable process over a time step h,
/// i.e. scale h^(1/alpha). Row-major: sample i occupies [i*dim, (i+1)*dim).
std::vector<double> sample_increments(double alpha, double h, std::size_t count, int dim,
                                      std::uint64_t seed);

/// CF of one increment over time h: prod_j exp(-h |s_j|^alpha).
double increment_cf(std::span<const double> s, double alpha, double h);

}  // namespace cfid
