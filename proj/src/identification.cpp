#include "cfid/identification.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <set>

#include "cfid/objective.hpp"

namespace cfid {

LossMode parse_loss_mode(const std::string& name) {
  if (name == "averaged_ecf" || name == "averaged") return LossMode::averaged_ecf;
  if (name == "per_trajectory") return LossMode::per_trajectory;
  throw ConfigError("unknown loss mode '" + name + "' (expected averaged_ecf or per_trajectory)");
}

std::string to_string(LossMode mode) {
  return mode == LossMode::averaged_ecf ? "averaged_ecf" : "per_trajectory";
}

void LossConfig::validate() const {
  if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
  if (!(gaussian_reg >= 0.0)) throw ConfigError("gaussian_reg must be >= 0");
  if (nu < 1) throw ConfigError("nu must be >= 1");
  if (checkpoint_stride < 0) throw ConfigError("checkpoint_stride must be >= 0");
  if (grid.dim() < 1) throw ConfigError("loss grid is not set");
  if (static_cast<int>(g.size()) != grid.dim()) {
    throw ConfigError("g has " + std::to_string(g.size()) + " entries for a " +
                      std::to_string(grid.dim()) + "D grid");
  }
}

PropagatorConfig propagator_config(const FourierDrift& model, const Dataset& ds,
                                   const LossConfig& cfg) {
  if (!(ds.dt > 0.0)) throw ConfigError("dataset dt must be positive");
  PropagatorConfig pc;
  pc.alpha = cfg.alpha;
  pc.g = cfg.g;
  pc.h = ds.dt / cfg.nu;
  pc.grid = cfg.grid;
  pc.model = model;
  pc.decay = cfg.decay;
  return pc;
}

double residual_loss(std::span<const cplx> pred, std::span<const cplx> target) {
  if (pred.size() != target.size()) throw ConfigError("prediction and target sizes differ");
  double acc = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) acc += std::norm(pred[p] - target[p]);
  return 0.5 * acc;
}

double l1_norm(const FourierDrift& model) { return model.l1_norm(); }

// ---------------------------------------------------------------------------

MmdObjective::MmdObjective(const Dataset& ds, const LossConfig& cfg) : ds_(ds), cfg_(cfg) {
  cfg_.validate();
  if (ds_.dim != cfg_.grid.dim()) throw ConfigError("dataset and grid dimensions differ");
  trajectories_ = ds_.valid_trajectories();
  if (trajectories_.empty()) throw EmptyDatasetError("no valid trajectories to train on");
  if (ds_.observations < 2) throw EmptyDatasetError("need at least two observations per trajectory");
  if (cfg_.mode == LossMode::averaged_ecf) {
    targets_.reserve(ds_.observations);
    for (std::size_t j = 0; j < ds_.observations; ++j) {
      targets_.push_back(empirical_cf(ds_, j, cfg_.grid, cfg_.gaussian_reg));
    }
  }
  const std::size_t pairs = ds_.observations - 1;
  if (cfg_.first_pair >= pairs) {
    throw ConfigError("first_pair = " + std::to_string(cfg_.first_pair) + " leaves no snapshot pairs");
  }
  const std::size_t per_pair = cfg_.mode == LossMode::averaged_ecf ? 1 : trajectories_.size();
  items_ = (pairs - cfg_.first_pair) * per_pair;
  weight_ = cfg_.mode == LossMode::averaged_ecf ? 1.0 : 1.0 / static_cast<double>(per_pair);
}

std::size_t MmdObjective::pairs() const { return ds_.observations - 1; }

std::pair<CFField, CFField> MmdObjective::item(std::size_t index) const {
  const std::size_t pair = pair_of(index);
  if (cfg_.mode == LossMode::averaged_ecf) return {targets_[pair], targets_[pair + 1]};
  const std::size_t n = trajectories_.size();
  const Trajectory& t = *trajectories_[index % n];
  CFField a = per_trajectory_cf(t.state(pair, ds_.dim), cfg_.grid, cfg_.gaussian_reg);
  CFField b = per_trajectory_cf(t.state(pair + 1, ds_.dim), cfg_.grid, cfg_.gaussian_reg);
  a.time = static_cast<double>(pair) * ds_.dt;
  b.time = static_cast<double>(pair + 1) * ds_.dt;
  return {std::move(a), std::move(b)};
}

std::size_t MmdObjective::pair_of(std::size_t index) const {
  return cfg_.first_pair +
         (cfg_.mode == LossMode::averaged_ecf ? index : index / trajectories_.size());
}

namespace {

[[noreturn]] void rethrow_with_pair(const std::exception_ptr& error, std::size_t pair) {
  try {
    std::rethrow_exception(error);
  } catch (const InstabilityError& e) {
    throw InstabilityError("snapshot pair " + std::to_string(pair) + ": " + e.what(), e.step(),
                           e.max_abs());
  }
}

}  // namespace

double MmdObjective::chained_loss(const Propagator& prop) const {
  if (cfg_.mode != LossMode::averaged_ecf) {
    throw ConfigError("chained pairing is only defined for the averaged_ecf loss");
  }
  double total = 0.0;
  CFField psi = targets_[cfg_.first_pair];
  for (std::size_t j = cfg_.first_pair; j + 1 < ds_.observations; ++j) {
    try {
      psi = evolve(psi, prop, cfg_.nu, false).final;
    } catch (const InstabilityError&) {
      rethrow_with_pair(std::current_exception(), j);
    }
    total += residual_loss(psi.values, targets_[j + 1].values);
  }
  return total;
}

GradientReport MmdObjective::evaluate(const FourierDrift& model, bool want_grad) const {
  const Propagator prop(propagator_config(model, ds_, cfg_));
  GradientReport report;
  if (cfg_.pairing == Pairing::chained) {
    if (want_grad) throw ConfigError("gradients need teacher_forced pairing");
    report.data_loss = chained_loss(prop);
    report.loss = report.data_loss + cfg_.mu * model.l1_norm();
    return report;
  }

  const std::size_t n_items = items_;
  const int nu = cfg_.nu;
  const int stride = cfg_.checkpoint_stride <= 1 ? 1 : cfg_.checkpoint_stride;
  std::vector<double> item_loss(n_items, 0.0);
  std::vector<std::exception_ptr> errors(n_items);

  const int threads = std::max(1, omp_get_max_threads());
  std::vector<ComplexVector> sens(want_grad ? static_cast<std::size_t>(threads) : 0);

#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_items); ++ii) {
    const auto index = static_cast<std::size_t>(ii);
    try {
      auto [psi0, target] = item(index);
      const std::size_t n = psi0.values.size();
      if (!want_grad) {
        const CFField out = evolve(psi0, prop, nu, false).final;
        item_loss[index] = weight_ * residual_loss(out.values, target.values);
        continue;
      }
      auto& buffer = sens[static_cast<std::size_t>(omp_get_thread_num())];
      if (buffer.empty()) buffer.assign(prop.sensitivity_size(), cplx{});

      std::vector<ComplexVector> checkpoints;
      ComplexVector cur = psi0.values;
      ComplexVector next(n);
      for (int s = 0; s < nu; ++s) {
        if (s % stride == 0) checkpoints.push_back(cur);
        prop.apply(cur, next);
        check_stable(next, s + 1);
        cur.swap(next);
      }
      item_loss[index] = weight_ * residual_loss(cur, target.values);

      ComplexVector lambda(n);
      for (std::size_t p = 0; p < n; ++p) lambda[p] = weight_ * (cur[p] - target.values[p]);
      std::vector<ComplexVector> segment;
      int segment_start = -1;
      for (int s = nu - 1; s >= 0; --s) {
        const int start = (s / stride) * stride;
        if (start != segment_start) {
          const int len = std::min(stride, nu - start);
          segment.assign(static_cast<std::size_t>(len), ComplexVector(n));
          segment[0] = checkpoints[static_cast<std::size_t>(s / stride)];
          for (int i = 1; i < len; ++i) prop.apply(segment[i - 1], segment[i]);
          segment_start = start;
        }
        prop.accumulate_sensitivity(lambda, segment[static_cast<std::size_t>(s - start)], buffer);
        if (s > 0) {
          prop.apply_adjoint(lambda, next);
          lambda.swap(next);
        }
      }
    } catch (...) {
      errors[index] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < n_items; ++i) {
    if (errors[i]) rethrow_with_pair(errors[i], pair_of(i));
  }

  report.pair_residuals.assign(pairs(), 0.0);
  for (std::size_t i = 0; i < n_items; ++i) {
    report.data_loss += item_loss[i];
    report.pair_residuals[pair_of(i)] += item_loss[i];
  }
  for (double& r : report.pair_residuals) r = std::sqrt(2.0 * r);
  report.loss = report.data_loss + cfg_.mu * model.l1_norm();

  if (want_grad) {
    ComplexVector total(prop.sensitivity_size(), cplx{});
    for (const auto& buffer : sens) {
      if (buffer.empty()) continue;
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += buffer[i];
    }
    report.coefficient_grad = prop.coefficient_gradient(total);
  }
  return report;
}

double MmdObjective::loss(const FourierDrift& model) const { return evaluate(model, false).loss; }

GradientReport MmdObjective::gradient(const FourierDrift& model) const {
  return evaluate(model, true);
}

GradientReport MmdObjective::gradient(const FourierDrift& model,
                                      const Parameterization& params) const {
  GradientReport report = evaluate(model, true);
  ComplexVector total = report.coefficient_grad;
  if (cfg_.mu > 0.0) {
    const auto theta = model.coeffs();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double a = std::abs(theta[i]);
      if (a > 0.0) total[i] += cfg_.mu * theta[i] / a;
    }
  }
  report.grad = params.pullback(total);
  return report;
}

double mmd_loss(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg) {
  return MmdObjective(ds, cfg).loss(model);
}

GradientReport mmd_gradient(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg) {
  return MmdObjective(ds, cfg).gradient(model);
}

GradientReport mmd_gradient(const FourierDrift& model, const Dataset& ds, const LossConfig& cfg,
                            const Parameterization& params) {
  return MmdObjective(ds, cfg).gradient(model, params);
}

// ---------------------------------------------------------------------------

Parameterization::Parameterization(int dim, int J, int L, const SymmetrySpec& spec)
    : dim_(dim), J_(J), L_(L), spec_(spec.dim() == 0 ? SymmetrySpec(dim) : spec) {
  if (spec_.dim() != dim) throw ConfigError("symmetry spec dimension does not match the model");
  const IndexBox modes(dim, J);
  const std::size_t n = modes.size() * static_cast<std::size_t>(dim);
  std::set<std::size_t> covered;  // real coordinates already spanned, 2*index + (imag ? 1 : 0)
  ComplexVector v(n);
  for (std::size_t coord = 0; coord < 2 * n; ++coord) {
    if (covered.count(coord)) continue;
    std::fill(v.begin(), v.end(), cplx{});
    v[coord / 2] = coord % 2 == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
    project_symmetry_inplace(v, modes, dim, spec_);
    double norm2 = 0.0;
    for (const cplx& c : v) norm2 += std::norm(c);
    if (norm2 < 1e-20) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == cplx{}) continue;
      entries.push_back({i, v[i] * inv});
      if (v[i].real() != 0.0) covered.insert(2 * i);
      if (v[i].imag() != 0.0) covered.insert(2 * i + 1);
    }
    basis_.push_back(std::move(entries));
  }
}

std::vector<double> Parameterization::pack(const FourierDrift& model) const {
  if (model.dim() != dim_ || model.J() != J_) throw ConfigError("model shape does not match");
  const auto theta = model.coeffs();
  std::vector<double> out(basis_.size(), 0.0);
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    double acc = 0.0;
    for (const Entry& e : basis_[k]) {
      acc += theta[e.index].real() * e.weight.real() + theta[e.index].imag() * e.weight.imag();
    }
    out[k] = acc;
  }
  return out;
}

FourierDrift Parameterization::unpack(std::span<const double> params) const {
  if (params.size() != basis_.size()) throw ConfigError("parameter vector has wrong length");
  FourierDrift model(dim_, J_, L_);
  auto theta = model.coeffs();
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    for (const Entry& e : basis_[k]) theta[e.index] += params[k] * e.weight;
  }
  return model;
}

std::vector<double> Parameterization::pullback(std::span<const cplx> coefficient_grad) const {
  std::vector<double> out(basis_.size(), 0.0);
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    double acc = 0.0;
    for (const Entry& e : basis_[k]) {
      acc += coefficient_grad[e.index].real() * e.weight.real() +
             coefficient_grad[e.index].imag() * e.weight.imag();
    }
    out[k] = acc;
  }
  return out;
}

FourierDrift sine_embedding(double t, int J, int L) {
  if (J < L) throw ConfigError("sine embedding needs J >= L");
  FourierDrift model(1, J, L);
  model.coeff(MultiIndex{L, 0, 0}, 0) = cplx(0.0, -t);
  model.coeff(MultiIndex{-L, 0, 0}, 0) = cplx(0.0, t);
  return model;
}

}  // namespace cfid
