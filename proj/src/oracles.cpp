#include "cfid/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfid/stable_noise.hpp"

namespace cfid {

cplx ou_closed_form(const std::function<cplx(double)>& psi0, double s, double t, double g,
                    double alpha) {
  check_alpha(alpha);
  if (t < 0.0) throw DomainError("ou_closed_form: t must be non-negative");
  const double spread = std::pow(g, alpha) * std::pow(std::abs(s), alpha) *
                        (1.0 - std::exp(-t * alpha)) / alpha;
  return std::exp(-spread) * psi0(std::exp(-t) * s);
}

CFField sine_kernel_reference(const CFField& psi, double h, double g, double alpha) {
  check_alpha(alpha);
  if (psi.grid.dim() != 1) throw ConfigError("sine_kernel_reference needs a 1D grid");
  if (h < 0.0) throw DomainError("h must be non-negative");
  const SpectralGrid& grid = psi.grid;
  // s +- 1 sits exactly n_L L grid points away.
  const int unit = grid.n_L() * grid.L();
  const int M = grid.M();
  const double ds = grid.spacing();
  auto at = [&](int j) -> cplx {
    if (j < -M || j > M) return cplx{};
    return psi.values[static_cast<std::size_t>(j + M)];
  };
  CFField out(grid, psi.time + h);
  for (int j = -M; j <= M; ++j) {
    const double s = j * ds;
    const double sh = s * h;
    const double e = std::exp(-h * std::pow(std::abs(s * g), alpha));
    const cplx v = (1.0 - sh * sh / 4.0) * at(j) - (sh / 2.0) * (at(j - unit) - at(j + unit)) +
                   (sh * sh / 8.0) * (at(j - 2 * unit) + at(j + 2 * unit));
    out.values[static_cast<std::size_t>(j + M)] = e * v;
  }
  return out;
}

cplx stability_factor(double w, double g, double alpha) {
  return std::exp(-w * std::pow(g, alpha)) * cplx(1.0 - 0.5 * w * w, w);
}

double stability_margin(double g, double alpha) {
  check_alpha(alpha);
  if (!(g > 0.0)) throw DomainError("stability_margin: g must be positive");
  auto excess = [&](double w) { return std::abs(stability_factor(w, g, alpha)) - 1.0; };
  // |Phi|^2 = e^{-2 w g^a}(1 + w^4/4) first rises above 1 (if ever) well before
  // w = 60, after which the exponential wins for any g admitted here.
  const double w_max = 60.0;
  const double dw = 1e-3;
  double prev = dw;
  for (double w = dw; w <= w_max; w += dw) {
    if (excess(w) > 0.0) {
      double lo = prev;
      double hi = w;
      while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = w;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace cfid

namespace cfid {

OuStudy ou_monte_carlo_study(const std::vector<double>& hs, double T, double g, double x0,
                             std::size_t samples, std::uint64_t seed, double s_max) {
  if (hs.empty() || samples == 0) throw ConfigError("OU study needs step sizes and samples");
  const double delta = *std::min_element(hs.begin(), hs.end());
  const auto fine_steps = static_cast<long long>(std::llround(T / delta));
  std::vector<long long> ratio;
  for (double h : hs) {
    const auto r = std::llround(h / delta);
    if (r < 1 || std::abs(r * delta - h) > 1e-12 * h || fine_steps % r != 0 ||
        std::abs(fine_steps * delta - T) > 1e-9 * T) {
      throw ConfigError("OU study: each h must be a multiple of min(h) and divide T");
    }
    ratio.push_back(r);
  }

  const double decay = std::exp(-delta);
  const double var_i = 0.5 * (1.0 - std::exp(-2.0 * delta));
  const double cov = 1.0 - decay;
  // Cholesky factor of [[delta, cov], [cov, var_i]].
  const double l11 = std::sqrt(delta);
  const double l21 = cov / l11;
  const double l22 = std::sqrt(std::max(0.0, var_i - l21 * l21));
  const double noise = g * std::sqrt(2.0);

  std::vector<double> exact(samples);
  std::vector<std::vector<double>> em(hs.size(), std::vector<double>(samples));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(samples); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    StreamRng rng(seed, 0x0u, k);
    double x = x0;
    std::vector<double> y(hs.size(), x0), acc(hs.size(), 0.0);
    for (long long n = 1; n <= fine_steps; ++n) {
      const double z1 = rng.normal(), z2 = rng.normal();
      const double dW = l11 * z1;
      x = decay * x + noise * (l21 * z1 + l22 * z2);
      for (std::size_t i = 0; i < hs.size(); ++i) {
        acc[i] += dW;
        if (n % ratio[i] == 0) {
          y[i] += -y[i] * hs[i] + noise * acc[i];
          acc[i] = 0.0;
        }
      }
    }
    exact[k] = x;
    for (std::size_t i = 0; i < hs.size(); ++i) em[i][k] = y[i];
  }

  auto ecf = [&](const std::vector<double>& v, double s) {
    cplx sum{};
    for (double x : v) sum += std::exp(cplx(0.0, s * x));
    return sum / static_cast<double>(v.size());
  };
  OuStudy out;
  out.h = hs;
  out.em_error.assign(hs.size(), 0.0);
  const auto psi0 = [x0](double s) { return std::exp(cplx(0.0, s * x0)); };
  const int points = 161;
  for (int p = 0; p < points; ++p) {
    const double s = -s_max + 2.0 * s_max * p / (points - 1);
    const cplx ex = ecf(exact, s);
    out.exact_error = std::max(out.exact_error, std::abs(ex - ou_closed_form(psi0, s, T, g, 2.0)));
    for (std::size_t i = 0; i < hs.size(); ++i) {
      out.em_error[i] = std::max(out.em_error[i], std::abs(ecf(em[i], s) - ex));
    }
  }
  out.mc_tolerance = 3.0 / std::sqrt(static_cast<double>(samples));
  return out;
}

}  // namespace cfid
