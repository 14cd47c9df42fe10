#pragma once

#include "cfid/propagator.hpp"

// Serial, unoptimized transcriptions of the propagator and its gradient. They
// walk the formulas literally (no stencil cache, no OpenMP) and exist to check
// the fast kernels in tests and benchmarks.
namespace cfid::reference {

CFField step(const CFField& psi, const PropagatorConfig& config);

/// L = 1/2 sum_grid |psi_nu - target|^2 after `nu` steps from psi0.
double pair_loss(const CFField& psi0, const CFField& target, const PropagatorConfig& config,
                 int nu);

/// dL/dRe(theta) + i dL/dIm(theta) of pair_loss, one coefficient at a time.
ComplexVector pair_gradient(const CFField& psi0, const CFField& target,
                            const PropagatorConfig& config, int nu);

}  // namespace cfid::reference
