#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cfid {

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Self-check against analytic results: drift-free closed form, the
/// Gaussian OU Monte Carlo convergence order, the sine Bessel kernel, an
/// adjoint-vs-finite-difference gradient check and the stability boundary.
std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed = 1);

}  // namespace cfid
