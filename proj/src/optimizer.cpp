#include "cfid/optimizer.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>

#include "cfid/common.hpp"

namespace cfid {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tolerance: return "gradient_tolerance";
    case Termination::step_tolerance: return "step_tolerance";
    case Termination::max_iterations: return "max_iterations";
  }
  return "?";
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Positive root tau of ||p + tau d|| = radius.
double to_boundary(const Vec& p, const Vec& d, double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * p.dot(d);
  const double c = p.squaredNorm() - radius * radius;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  return (-b + disc) / (2.0 * a);
}

Vec steihaug(const Mat& B, const Vec& g, double radius, double tol, int max_iter) {
  const Eigen::Index n = g.size();
  Vec p = Vec::Zero(n);
  Vec r = g;
  if (r.norm() <= tol) return p;
  Vec d = -r;
  const double stop = std::max(tol, std::min(0.5, std::sqrt(r.norm())) * r.norm());
  for (int it = 0; it < max_iter; ++it) {
    const Vec Bd = B * d;
    const double dBd = d.dot(Bd);
    if (dBd <= 0.0) return p + to_boundary(p, d, radius) * d;
    const double alpha = r.squaredNorm() / dBd;
    const Vec p_next = p + alpha * d;
    if (p_next.norm() >= radius) return p + to_boundary(p, d, radius) * d;
    const Vec r_next = r + alpha * Bd;
    if (r_next.norm() < stop) return p_next;
    const double beta = r_next.squaredNorm() / r.squaredNorm();
    d = -r_next + beta * d;
    r = r_next;
    p = p_next;
  }
  return p;
}

}  // namespace

std::vector<double> steihaug_cg(std::span<const double> B, std::span<const double> g,
                                double radius, double tol, int max_iter) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (B.size() != g.size() * g.size()) throw ConfigError("steihaug_cg: B must be n x n");
  const Mat Bm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(B.data(), n, n);
  const Vec gv = Eigen::Map<const Vec>(g.data(), n);
  const Vec p = steihaug(Bm, gv, radius, tol, max_iter > 0 ? max_iter : static_cast<int>(2 * n + 10));
  return {p.data(), p.data() + p.size()};
}

OptimizerResult minimize_trust_sr1(const SmoothObjective& f, std::vector<double> x0,
                                   const OptimizerOptions& opt,
                                   const IterationCallback& on_iteration) {
  if (!(opt.grad_tol > 0.0) || !(opt.step_tol > 0.0)) throw ConfigError("tolerances must be > 0");
  if (opt.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(opt.initial_radius > 0.0)) throw ConfigError("initial_radius must be > 0");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const auto n = static_cast<Eigen::Index>(x0.size());
  OptimizerResult result;
  std::vector<double> gbuf(x0.size());
  auto eval = [&](const Vec& x, Vec& g) {
    ++result.evaluations;
    const double fx = f(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), gbuf);
    g = Eigen::Map<const Vec>(gbuf.data(), n);
    return fx;
  };

  Vec x = Eigen::Map<const Vec>(x0.data(), n);
  Vec g(n);
  double fx = eval(x, g);
  if (!std::isfinite(fx)) throw Error("objective is not finite at the initial point");
  Mat B = Mat::Identity(n, n);
  bool scaled = false;
  double radius = opt.initial_radius;
  double best = fx;
  int since_best = 0;
  bool warned = false;

  result.reason = Termination::max_iterations;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (n == 0 || g.norm() <= opt.grad_tol) {
      result.reason = Termination::gradient_tolerance;
      break;
    }
    const Vec s = steihaug(B, g, radius, 1e-12 * std::max(1.0, g.norm()), static_cast<int>(2 * n + 10));
    const Vec Bs = B * s;
    const double predicted = -(g.dot(s) + 0.5 * s.dot(Bs));
    Vec g_new(n);
    const Vec x_trial = x + s;
    const double f_new = eval(x_trial, g_new);
    const bool finite = std::isfinite(f_new) && g_new.allFinite();
    const double actual = fx - f_new;
    const double rho = (finite && predicted > 0.0) ? actual / predicted : -1.0;
    const bool accept = finite && rho > opt.eta && actual > 0.0;

    const double snorm = s.norm();
    if (rho > 0.75) {
      if (snorm > 0.8 * radius) radius = std::min(2.0 * radius, opt.max_radius);
    } else if (rho < 0.1) {
      radius = 0.5 * (finite ? std::min(radius, snorm) : snorm);
    }

    std::string update = "none";
    if (finite) {
      const Vec y = g_new - g;
      const double ys = y.dot(s);
      if (!scaled && ys > 0.0) {
        B = Mat::Identity(n, n) * (y.squaredNorm() / ys);
        scaled = true;
      }
      const Vec r = y - B * s;
      const double rs = r.dot(s);
      if (std::abs(rs) >= 1e-8 * snorm * r.norm() && r.norm() > 0.0) {
        B += (r * r.transpose()) / rs;
        update = "sr1";
      } else if (ys > 1e-10 * snorm * y.norm()) {
        const Vec Bs2 = B * s;
        B += (y * y.transpose()) / ys - (Bs2 * Bs2.transpose()) / s.dot(Bs2);
        update = "bfgs";
      }
    }

    if (accept) {
      x = x_trial;
      fx = f_new;
      g = g_new;
    }
    if (fx < best) {
      best = fx;
      since_best = 0;
    } else if (++since_best >= opt.patience && !warned) {
      result.warnings.push_back("no decrease in " + std::to_string(opt.patience) +
                                " consecutive iterations (from iteration " +
                                std::to_string(it - opt.patience + 1) + ")");
      warned = true;
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.loss = fx;
    rec.grad_norm = g.norm();
    rec.radius = radius;
    rec.step_norm = snorm;
    rec.rho = rho;
    rec.accepted = accept;
    rec.update = update;
    rec.seconds = elapsed();
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);

    if (g.norm() <= opt.grad_tol) {
      result.reason = Termination::gradient_tolerance;
      break;
    }
    if (radius < opt.step_tol) {
      result.reason = Termination::step_tolerance;
      break;
    }
  }
  result.x.assign(x.data(), x.data() + x.size());
  result.grad.assign(g.data(), g.data() + g.size());
  result.f = fx;
  return result;
}

}  // namespace cfid
