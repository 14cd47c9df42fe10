#include "cfid/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfid/oracles.hpp"
#include "cfid/stable_noise.hpp"

namespace cfid {

DecayConvention parse_decay_convention(const std::string& name) {
  if (name == "componentwise") return DecayConvention::componentwise;
  if (name == "inner_product") return DecayConvention::inner_product;
  if (name == "printed_scheme") return DecayConvention::printed_scheme;
  throw ConfigError("unknown decay convention '" + name +
                    "' (expected componentwise, inner_product or printed_scheme)");
}

std::string to_string(DecayConvention convention) {
  switch (convention) {
    case DecayConvention::componentwise: return "componentwise";
    case DecayConvention::inner_product: return "inner_product";
    case DecayConvention::printed_scheme: return "printed_scheme";
  }
  return "?";
}

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int ceil_div(int a, int b) { return -floor_div(-a, b); }

void validate(const PropagatorConfig& c) {
  check_alpha(c.alpha);
  const int d = c.grid.dim();
  if (d < 1) throw ConfigError("propagator grid is empty");
  if (c.model.dim() != d) throw ConfigError("model and grid dimensions differ");
  if (c.model.L() != c.grid.L()) {
    throw ConfigError("model L=" + std::to_string(c.model.L()) + " but grid L=" +
                      std::to_string(c.grid.L()));
  }
  if (static_cast<int>(c.g.size()) != d) {
    throw ConfigError("g has " + std::to_string(c.g.size()) + " entries, expected " +
                      std::to_string(d));
  }
  for (double gl : c.g) {
    if (!(gl >= 0.0) || !std::isfinite(gl)) throw DomainError("g entries must be finite and >= 0");
  }
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw DomainError("h must be positive");
}

double decay_factor(const PropagatorConfig& c, const MultiIndex& j) {
  const int d = c.grid.dim();
  const double ds = c.grid.spacing();
  double e = 0.0;
  switch (c.decay) {
    case DecayConvention::componentwise:
      for (int a = 0; a < d; ++a) e += std::pow(std::abs(ds * j[a] * c.g[a]), c.alpha);
      return std::exp(-c.h * e);
    case DecayConvention::inner_product:
      for (int a = 0; a < d; ++a) e += j[a] * c.g[a];
      return std::exp(-c.h * std::pow(std::abs(ds * e), c.alpha));
    case DecayConvention::printed_scheme:
      for (int a = 0; a < d; ++a) e += j[a] * c.g[a];
      return std::exp(-c.h * ds * std::pow(std::abs(e), c.alpha));
  }
  return 1.0;
}

}  // namespace

Propagator::Propagator(const PropagatorConfig& config)
    : config_(config),
      w_(config.h * config.grid.spacing()),
      grid_size_(config.grid.size()),
      shifts_(config.grid.dim(), 2 * std::max(config.model.J(), 0)),
      num_shifts_(shifts_.size()) {
  validate(config_);
  const int d = grid().dim();
  const IndexBox& box = grid().box();
  const IndexBox& modes = config_.model.modes();
  const ComplexVector conv = coefficient_convolution(config_.model);
  const auto theta = config_.model.coeffs();

  decay_.resize(grid_size_);
  stencil_.assign(grid_size_ * num_shifts_, cplx{});
  const double w = w_;
  const double half_w2 = 0.5 * w * w;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(grid_size_); ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    const MultiIndex j = box.unflatten(p);
    const double e = decay_factor(config_, j);
    decay_[p] = e;
    cplx* row = stencil_.data() + p * num_shifts_;
    for (std::size_t kf = 0; kf < num_shifts_; ++kf) {
      const MultiIndex k = shifts_.unflatten(kf);
      cplx c{};
      if (modes.contains(k)) {
        const std::size_t mode = modes.flatten(k);
        cplx lin{};
        for (int m = 0; m < d; ++m) lin += static_cast<double>(j[m]) * theta[mode * d + m];
        c += cplx(0.0, w) * lin;
      }
      cplx quad{};
      const cplx* ck = conv.data() + kf * d * d;
      for (int m = 0; m < d; ++m) {
        for (int mp = 0; mp < d; ++mp) {
          quad += static_cast<double>(j[m]) * static_cast<double>(j[mp]) * ck[m * d + mp];
        }
      }
      c -= half_w2 * quad;
      if (kf == shifts_.center()) c += 1.0;
      row[kf] = e * c;
    }
  }

  double gmin = config_.g.front();
  for (double gl : config_.g) gmin = std::min(gmin, gl);
  if (gmin > 0.0) {
    const double margin = stability_margin(gmin, config_.alpha);
    if (w_ > margin) {
      std::ostringstream os;
      os << "h*ds = " << w_ << " exceeds the stability margin " << margin << " for g = " << gmin
         << ", alpha = " << config_.alpha;
      warning_ = os.str();
    }
  }
}

// Visits every shift k with the partner point on the grid. Sign = +1 gives the
// partner p + k n_L (forward), Sign = -1 gives p - k n_L (adjoint).
template <int Sign, class F>
void Propagator::for_each_shift(std::size_t p, F&& f) const {
  const IndexBox& box = grid().box();
  const int d = box.dim();
  const int M = box.radius();
  const int R = shifts_.radius();
  const int nL = grid().n_L();
  const MultiIndex i = box.unflatten(p);
  MultiIndex lo{};
  MultiIndex hi{};
  for (int a = 0; a < d; ++a) {
    int a_lo = ceil_div(-M - i[a], nL);
    int a_hi = floor_div(M - i[a], nL);
    if constexpr (Sign < 0) {
      const int t = -a_hi;
      a_hi = -a_lo;
      a_lo = t;
    }
    lo[a] = std::max(-R, a_lo);
    hi[a] = std::min(R, a_hi);
    if (lo[a] > hi[a]) return;
  }
  const int last = d - 1;
  const std::ptrdiff_t q_step = static_cast<std::ptrdiff_t>(Sign) * nL;
  MultiIndex k = lo;
  while (true) {
    std::size_t kf = shifts_.flatten(k);
    std::ptrdiff_t q = static_cast<std::ptrdiff_t>(p);
    for (int a = 0; a < d; ++a) {
      q += static_cast<std::ptrdiff_t>(Sign) * k[a] * nL *
           static_cast<std::ptrdiff_t>(box.stride(a));
    }
    for (int kk = lo[last]; kk <= hi[last]; ++kk) {
      f(kf, static_cast<std::size_t>(q));
      ++kf;
      q += q_step;
    }
    int a = last - 1;
    for (; a >= 0; --a) {
      if (++k[a] <= hi[a]) break;
      k[a] = lo[a];
    }
    if (a < 0) break;
  }
}

void Propagator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != grid_size_ || out.size() != grid_size_) {
    throw ConfigError("propagator input/output size does not match the grid");
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(grid_size_); ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    const cplx* row = stencil_.data() + p * num_shifts_;
    cplx acc{};
    for_each_shift<1>(p, [&](std::size_t kf, std::size_t q) { acc += row[kf] * in[q]; });
    out[p] = acc;
  }
}

void Propagator::apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != grid_size_ || out.size() != grid_size_) {
    throw ConfigError("propagator input/output size does not match the grid");
  }
  // out[q] = sum over (p, k) with p + k n_L = q of conj(c(p, k)) in[p]; gathered
  // per q so every output is written by one thread.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qq = 0; qq < static_cast<std::ptrdiff_t>(grid_size_); ++qq) {
    const auto q = static_cast<std::size_t>(qq);
    cplx acc{};
    for_each_shift<-1>(q, [&](std::size_t kf, std::size_t p) {
      acc += std::conj(stencil_[p * num_shifts_ + kf]) * in[p];
    });
    out[q] = acc;
  }
}

void Propagator::accumulate_sensitivity(std::span<const cplx> lambda_next,
                                        std::span<const cplx> psi_prev,
                                        std::span<cplx> sens) const {
  if (sens.size() != sensitivity_size()) throw ConfigError("sensitivity buffer has wrong size");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(grid_size_); ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    const cplx lam = std::conj(lambda_next[p]);
    if (lam == cplx{}) continue;
    cplx* row = sens.data() + p * num_shifts_;
    for_each_shift<1>(p, [&](std::size_t kf, std::size_t q) { row[kf] += lam * psi_prev[q]; });
  }
}

ComplexVector Propagator::coefficient_gradient(std::span<const cplx> sens) const {
  if (sens.size() != sensitivity_size()) throw ConfigError("sensitivity buffer has wrong size");
  const int d = grid().dim();
  const IndexBox& box = grid().box();
  const IndexBox& modes = config_.model.modes();
  const auto theta = config_.model.coeffs();
  const std::size_t nK = num_shifts_;
  const std::size_t ud = static_cast<std::size_t>(d);

  // First and second moments of the sensitivities, weighted by E(j).
  ComplexVector A(nK * ud, cplx{});
  ComplexVector B(nK * ud * ud, cplx{});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(nK); ++kk) {
    const auto kf = static_cast<std::size_t>(kk);
    cplx a[kMaxDim]{};
    cplx b[kMaxDim * kMaxDim]{};
    for (std::size_t p = 0; p < grid_size_; ++p) {
      const cplx v = sens[p * nK + kf];
      if (v == cplx{}) continue;
      const MultiIndex j = box.unflatten(p);
      const cplx ev = decay_[p] * v;
      for (int q = 0; q < d; ++q) {
        const cplx t = static_cast<double>(j[q]) * ev;
        a[q] += t;
        for (int m = 0; m < d; ++m) b[q * d + m] += static_cast<double>(j[m]) * t;
      }
    }
    for (int q = 0; q < d; ++q) {
      A[kf * ud + q] = a[q];
      for (int m = 0; m < d; ++m) B[(kf * ud + q) * ud + m] = b[q * d + m];
    }
  }

  const double w = w_;
  ComplexVector grad(theta.size(), cplx{});
  for (std::size_t rf = 0; rf < modes.size(); ++rf) {
    const MultiIndex r = modes.unflatten(rf);
    const std::size_t r_in_k = shifts_.flatten(r);
    for (int q = 0; q < d; ++q) {
      cplx G = cplx(0.0, w) * A[r_in_k * ud + q];
      cplx quad{};
      for (std::size_t tf = 0; tf < modes.size(); ++tf) {
        // k = r + t with t = k - r in the mode box; always inside the shift box.
        const MultiIndex t = modes.unflatten(tf);
        MultiIndex k{};
        for (int a = 0; a < d; ++a) k[a] = r[a] + t[a];
        const std::size_t kf = shifts_.flatten(k);
        for (int m = 0; m < d; ++m) quad += theta[tf * ud + m] * B[(kf * ud + q) * ud + m];
      }
      G -= w * w * quad;
      grad[rf * ud + q] = std::conj(G);
    }
  }
  return grad;
}

void check_stable(std::span<const cplx> values, int step) {
  double max_abs = 0.0;
  for (const cplx& v : values) {
    const double a = std::abs(v);
    if (!std::isfinite(a)) {
      throw InstabilityError("propagator produced a non-finite value at step " +
                                 std::to_string(step),
                             step, a);
    }
    max_abs = std::max(max_abs, a);
  }
  if (max_abs > kInstabilityThreshold) {
    std::ostringstream os;
    os << "propagator unstable at step " << step << ": max |psi| = " << max_abs;
    throw InstabilityError(os.str(), step, max_abs);
  }
}

CFField step(const CFField& psi, const PropagatorConfig& config) {
  if (!(psi.grid == config.grid)) throw ConfigError("field grid differs from propagator grid");
  const Propagator prop(config);
  CFField out(config.grid, psi.time + config.h);
  prop.apply(psi.values, out.values);
  return out;
}

EvolveResult evolve(const CFField& psi0, const Propagator& propagator, int nu, bool record) {
  if (nu < 1) throw ConfigError("nu must be at least 1");
  if (!(psi0.grid == propagator.grid())) {
    throw ConfigError("field grid differs from propagator grid");
  }
  EvolveResult result{psi0, std::nullopt};
  if (record) {
    result.tape.emplace();
    result.tape->states.reserve(static_cast<std::size_t>(nu) + 1);
    result.tape->states.push_back(psi0.values);
  }
  ComplexVector next(psi0.values.size());
  for (int s = 1; s <= nu; ++s) {
    propagator.apply(result.final.values, next);
    check_stable(next, s);
    result.final.values.swap(next);
    if (record) result.tape->states.push_back(result.final.values);
  }
  result.final.time = psi0.time + nu * propagator.config().h;
  return result;
}

EvolveResult evolve(const CFField& psi0, const PropagatorConfig& config, int nu, bool record) {
  const Propagator prop(config);
  return evolve(psi0, prop, nu, record);
}

}  // namespace cfid
