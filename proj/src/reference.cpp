#include "cfid/reference.hpp"

#include <cmath>

namespace cfid::reference {

namespace {

double decay(const PropagatorConfig& c, const MultiIndex& j) {
  const int d = c.grid.dim();
  const double ds = c.grid.spacing();
  double acc = 0.0;
  if (c.decay == DecayConvention::componentwise) {
    for (int a = 0; a < d; ++a) acc += std::pow(std::abs(j[a] * ds * c.g[a]), c.alpha);
    return std::exp(-c.h * acc);
  }
  for (int a = 0; a < d; ++a) acc += j[a] * c.g[a];
  if (c.decay == DecayConvention::inner_product) {
    return std::exp(-c.h * std::pow(std::abs(acc * ds), c.alpha));
  }
  return std::exp(-c.h * ds * std::pow(std::abs(acc), c.alpha));
}

// psi((j + k n_L) ds), zero off the grid.
cplx shifted(const CFField& psi, const MultiIndex& j, const MultiIndex& k) {
  const int d = psi.grid.dim();
  MultiIndex q{};
  for (int a = 0; a < d; ++a) q[a] = j[a] + k[a] * psi.grid.n_L();
  if (!psi.grid.box().contains(q)) return cplx{};
  return psi.values[psi.grid.box().flatten(q)];
}

// theta^k_m, zero outside the mode box.
cplx theta_at(const FourierDrift& model, const MultiIndex& k, int m) {
  if (!model.modes().contains(k)) return cplx{};
  return model.coeff(k, m);
}

MultiIndex sub(const MultiIndex& a, const MultiIndex& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

CFField step(const CFField& psi, const PropagatorConfig& config) {
  const int d = config.grid.dim();
  const double w = config.h * config.grid.spacing();
  const IndexBox& box = config.grid.box();
  const IndexBox& modes = config.model.modes();
  const IndexBox shifts(d, 2 * config.model.J());
  const ComplexVector conv = coefficient_convolution(config.model);

  CFField out(config.grid, psi.time + config.h);
  for (std::size_t p = 0; p < box.size(); ++p) {
    const MultiIndex j = box.unflatten(p);
    cplx drift{};
    for (std::size_t kf = 0; kf < modes.size(); ++kf) {
      const MultiIndex k = modes.unflatten(kf);
      const cplx v = shifted(psi, j, k);
      for (int m = 0; m < d; ++m) drift += static_cast<double>(j[m]) * config.model.coeff(kf, m) * v;
    }
    cplx second{};
    for (std::size_t kf = 0; kf < shifts.size(); ++kf) {
      const MultiIndex k = shifts.unflatten(kf);
      const cplx v = shifted(psi, j, k);
      for (int m = 0; m < d; ++m) {
        for (int mp = 0; mp < d; ++mp) {
          second += static_cast<double>(j[m]) * static_cast<double>(j[mp]) *
                    conv[kf * d * d + m * d + mp] * v;
        }
      }
    }
    out.values[p] =
        decay(config, j) * (psi.values[p] + cplx(0.0, w) * drift - 0.5 * w * w * second);
  }
  return out;
}

double pair_loss(const CFField& psi0, const CFField& target, const PropagatorConfig& config,
                 int nu) {
  CFField psi = psi0;
  for (int s = 0; s < nu; ++s) psi = reference::step(psi, config);
  double loss = 0.0;
  for (std::size_t p = 0; p < psi.values.size(); ++p) loss += std::norm(psi.values[p] - target.values[p]);
  return 0.5 * loss;
}

ComplexVector pair_gradient(const CFField& psi0, const CFField& target,
                            const PropagatorConfig& config, int nu) {
  const int d = config.grid.dim();
  const double w = config.h * config.grid.spacing();
  const IndexBox& box = config.grid.box();
  const IndexBox& modes = config.model.modes();
  const IndexBox shifts(d, 2 * config.model.J());

  std::vector<CFField> states{psi0};
  for (int s = 0; s < nu; ++s) states.push_back(reference::step(states.back(), config));

  // Multipliers lambda_s for s = 1..nu, obtained by applying the transpose
  // conjugate of the step matrix column by column.
  std::vector<ComplexVector> lambda(static_cast<std::size_t>(nu) + 1);
  lambda[nu].resize(box.size());
  for (std::size_t p = 0; p < box.size(); ++p) {
    lambda[nu][p] = states[nu].values[p] - target.values[p];
  }
  for (int s = nu - 1; s >= 1; --s) {
    lambda[s].assign(box.size(), cplx{});
    CFField unit(config.grid);
    for (std::size_t q = 0; q < box.size(); ++q) {
      unit.values.assign(box.size(), cplx{});
      unit.values[q] = 1.0;
      const CFField column = reference::step(unit, config);
      cplx acc{};
      for (std::size_t p = 0; p < box.size(); ++p) acc += std::conj(column.values[p]) * lambda[s + 1][p];
      lambda[s][q] = acc;
    }
  }

  ComplexVector grad(config.model.coeffs().size(), cplx{});
  for (std::size_t rf = 0; rf < modes.size(); ++rf) {
    const MultiIndex r = modes.unflatten(rf);
    for (int q = 0; q < d; ++q) {
      cplx G{};
      for (int s = 0; s < nu; ++s) {
        const CFField& psi = states[s];
        for (std::size_t p = 0; p < box.size(); ++p) {
          const MultiIndex j = box.unflatten(p);
          // d/dtheta^r_q of the step output at j.
          cplx dstep = cplx(0.0, w) * static_cast<double>(j[q]) * shifted(psi, j, r);
          for (std::size_t kf = 0; kf < shifts.size(); ++kf) {
            const MultiIndex k = shifts.unflatten(kf);
            const MultiIndex t = sub(k, r);
            cplx inner{};
            for (int m = 0; m < d; ++m) inner += theta_at(config.model, t, m) * static_cast<double>(j[m]);
            dstep -= w * w * static_cast<double>(j[q]) * inner * shifted(psi, j, k);
          }
          G += std::conj(lambda[s + 1][p]) * decay(config, j) * dstep;
        }
      }
      grad[rf * d + q] = std::conj(G);
    }
  }
  return grad;
}

}  // namespace cfid::reference
