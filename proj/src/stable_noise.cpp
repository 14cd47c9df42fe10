#include "cfid/stable_noise.hpp"

#include <cmath>
#include <numbers>

namespace cfid {

StableSpec::StableSpec(double a, double s) : alpha(a), scale(s) {
  check_alpha(alpha);
  if (!(scale > 0.0)) throw DomainError("stable scale must be positive");
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32), 0x9e3779b9u};
  engine_.seed(seq);
}

double StreamRng::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double StreamRng::exponential() { return -std::log(uniform()); }

double StreamRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void check_alpha(double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) {
    throw DomainError("alpha must lie in [1, 2], got " + std::to_string(alpha));
  }
}

double standard_stable(double alpha, StreamRng& rng) {
  const double u = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (alpha == 1.0) return std::tan(u);
  const double first = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
  const double second = std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  return first * second;
}

double sample_stable(const StableSpec& spec, StreamRng& rng) {
  return spec.scale * standard_stable(spec.alpha, rng);
}

std::vector<double> sample_increments(double alpha, double h, std::size_t count, int dim,
                                      std::uint64_t seed) {
  check_alpha(alpha);
  if (!(h > 0.0)) throw DomainError("time step h must be positive");
  if (count < 1 || dim < 1) throw DomainError("count and dim must be at least 1");
  const double scale = std::pow(h, 1.0 / alpha);
  StreamRng rng(seed, 0);
  std::vector<double> out(count * static_cast<std::size_t>(dim));
  for (double& x : out) x = scale * standard_stable(alpha, rng);
  return out;
}

double increment_cf(std::span<const double> s, double alpha, double h) {
  check_alpha(alpha);
  if (!(h > 0.0)) throw DomainError("time step h must be positive");
  double exponent = 0.0;
  for (double sj : s) exponent += std::pow(std::abs(sj), alpha);
  return std::exp(-h * exponent);
}

}  // namespace cfid
