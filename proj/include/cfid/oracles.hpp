#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cfid/common.hpp"
#include "cfid/spectral_grid.hpp"

namespace cfid {

/// CF at time t of dX = -X dt + g dL (d = 1):
///   exp(-g^alpha |s|^alpha (1 - e^{-alpha t}) / alpha) psi0(e^{-t} s).
cplx ou_closed_form(const std::function<cplx(double)>& psi0, double s, double t, double g,
                    double alpha);

/// The second-order kernel update for f(x) = sin x in d = 1,
///   E(s) [ (1 - s^2h^2/4) psi(s) - (sh/2)(psi(s-1) - psi(s+1))
///          + (s^2h^2/8)(psi(s-2) + psi(s+2)) ],
/// evaluated with off-grid values taken as zero and E(s) = exp(-h |s g|^alpha).
CFField sine_kernel_reference(const CFField& psi, double h, double g, double alpha);

/// Phi(w) = exp(-w g^alpha) (1 + i w - w^2/2).
cplx stability_factor(double w, double g, double alpha);

/// Smallest w > 0 with |Phi(w)| = 1, bisected to 1e-6; +infinity when
/// |Phi(w)| <= 1 on the whole search range.
double stability_margin(double g, double alpha);

struct OuStudy {
  std::vector<double> h;
  /// sup_s |ECF(Euler-Maruyama at h) - ECF(exact samples)|, same noise paths.
  std::vector<double> em_error;
  /// sup_s |ECF(exact samples) - closed form|; pure Monte Carlo error.
  double exact_error = 0.0;
  /// Three standard errors of an ECF value with this many samples.
  double mc_tolerance = 0.0;
};

/// Gaussian (alpha = 2) OU, dX = -X dt + g dL with L = sqrt(2) W, from x0 to
/// time T. Every sample path is built on the finest step delta = min(h): the
/// exact transition uses the pair (dW, int e^{-(t+delta-u)} dW_u), and the
/// Euler-Maruyama runs at each h sum the same dW. Errors are sup norms over
/// s in [-s_max, s_max]. Every h must be a multiple of delta and divide T.
OuStudy ou_monte_carlo_study(const std::vector<double>& hs, double T, double g, double x0,
                             std::size_t samples, std::uint64_t seed, double s_max = 4.0);

}  // namespace cfid
