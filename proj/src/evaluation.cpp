#include "cfid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cfid/objective.hpp"
#include "cfid/text_io.hpp"

namespace cfid {

using text::format_double;

double coeff_mae(const FourierDrift& learned, const FourierDrift& truth) {
  if (learned.dim() != truth.dim() || learned.J() != truth.J() || learned.L() != truth.L()) {
    throw ConfigError("coeff_mae: models differ in (dim, J, L)");
  }
  const auto a = learned.coeffs();
  const auto b = truth.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

std::vector<ScanPoint> loss_scan(const Dataset& ds, const Embedding& embedding,
                                 const std::vector<double>& theta_values, const LossConfig& cfg) {
  const MmdObjective objective(ds, cfg);
  std::vector<ScanPoint> out;
  out.reserve(theta_values.size());
  for (double t : theta_values) out.push_back({t, objective.loss(embedding(t))});
  return out;
}

void write_scan_csv(const std::vector<ScanPoint>& scan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "theta,loss\n";
  for (const auto& p : scan) out << format_double(p.theta) << ',' << format_double(p.loss) << '\n';
}

namespace {

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(v, 0.5); }

}  // namespace

TrajectoryError paired_error(const Dataset& a, const Dataset& b) {
  if (a.dim != b.dim || a.observations != b.observations ||
      a.trajectories.size() != b.trajectories.size()) {
    throw ConfigError("paired_error: datasets differ in shape");
  }
  if (a.observations < 2) throw ConfigError("paired_error: need at least two saved states");
  const int d = a.dim;
  std::vector<double> medians, iqrs;
  for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
    const Trajectory& ta = a.trajectories[k];
    const Trajectory& tb = b.trajectories[k];
    if (!ta.valid || !tb.valid) continue;
    std::vector<double> err;
    err.reserve(a.observations - 1);
    for (std::size_t j = 1; j < a.observations; ++j) {
      const auto xa = ta.state(j, d);
      const auto xb = tb.state(j, d);
      double s = 0.0;
      for (int m = 0; m < d; ++m) s += (xa[m] - xb[m]) * (xa[m] - xb[m]);
      err.push_back(std::sqrt(s));
    }
    medians.push_back(median(err));
    iqrs.push_back(quantile(err, 0.75) - quantile(err, 0.25));
  }
  if (medians.empty()) throw EmptyDatasetError("no valid trajectory pairs to compare");
  return {median(medians), median(iqrs)};
}

EvalReport trajectory_test_error(const FourierDrift& learned, const DriftSpec& truth,
                                 const SimulationConfig& sim, std::size_t n_test,
                                 std::uint64_t seed) {
  if (n_test < 1) throw ConfigError("n_test must be >= 1");
  if (learned.dim() != truth.dim()) throw ConfigError("learned and true drift differ in dimension");
  SimulationConfig cfg = sim;
  cfg.init = PointInit{std::vector<double>(static_cast<std::size_t>(truth.dim()), 0.0)};
  cfg.n_trajectories = n_test;
  cfg.seed = seed;

  auto run = [&](const DriftSpec& drift, std::uint64_t stream) {
    SimulationConfig c = cfg;
    c.stream = stream;
    return generate_dataset(drift, c);
  };
  const DriftSpec learned_spec(learned);
  Dataset ref = run(truth, 1);
  Dataset truth2 = run(truth, 2);
  Dataset fit = run(learned_spec, 3);
  Dataset fit_shared = run(learned_spec, 1);

  EvalReport rep;
  for (std::size_t k = 0; k < n_test; ++k) {
    const bool ok = ref.trajectories[k].valid && truth2.trajectories[k].valid &&
                    fit.trajectories[k].valid && fit_shared.trajectories[k].valid;
    if (!ok) {
      ++rep.dropped_trajectories;
      for (Dataset* ds : {&ref, &truth2, &fit, &fit_shared}) ds->trajectories[k].valid = false;
    }
  }
  rep.used_trajectories = n_test - rep.dropped_trajectories;
  if (rep.used_trajectories == 0) throw EmptyDatasetError("every test trajectory overflowed");
  rep.learned = paired_error(ref, fit);
  rep.reference = paired_error(ref, truth2);
  rep.shared_noise = paired_error(ref, fit_shared);
  rep.pairing_note =
      "trajectories paired by index with independent noise per set; shared_noise reuses the "
      "reference noise for the learned drift";
  return rep;
}

void write_eval_report(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# " << r.pairing_note << '\n' << "key,value\n";
  if (r.coeff_mae) out << "coeff_mae," << format_double(*r.coeff_mae) << '\n';
  out << "mmae," << format_double(r.learned.mmae) << '\n'
      << "miqr," << format_double(r.learned.miqr) << '\n'
      << "reference_mmae," << format_double(r.reference.mmae) << '\n'
      << "reference_miqr," << format_double(r.reference.miqr) << '\n'
      << "shared_noise_mmae," << format_double(r.shared_noise.mmae) << '\n'
      << "shared_noise_miqr," << format_double(r.shared_noise.miqr) << '\n'
      << "used_trajectories," << r.used_trajectories << '\n'
      << "dropped_trajectories," << r.dropped_trajectories << '\n';
}

std::string to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::stable: return "stable";
    case FixedPointKind::unstable: return "unstable";
    case FixedPointKind::saddle: return "saddle";
    case FixedPointKind::center_or_degenerate: return "center_or_degenerate";
  }
  return "?";
}

double PhasePortrait::x1(int i) const {
  return lo[0] + (hi[0] - lo[0]) * i / static_cast<double>(resolution - 1);
}
double PhasePortrait::x2(int k) const {
  return lo[1] + (hi[1] - lo[1]) * k / static_cast<double>(resolution - 1);
}

namespace {

FixedPointKind classify(const FieldEvaluator& eval, std::array<double, 2> x) {
  double jac[4];
  eval.jacobian(x, jac);
  const double tr = jac[0] + jac[3];
  const double det = jac[0] * jac[3] - jac[1] * jac[2];
  if (det < 0.0) return FixedPointKind::saddle;
  if (det == 0.0 || tr == 0.0) return FixedPointKind::center_or_degenerate;
  return tr < 0.0 ? FixedPointKind::stable : FixedPointKind::unstable;
}

}  // namespace

PhasePortrait phase_portrait(const FourierDrift& model, std::array<double, 2> lo,
                             std::array<double, 2> hi, int resolution) {
  if (model.dim() != 2) throw ConfigError("phase portraits need a 2D model");
  if (resolution < 2) throw ConfigError("portrait resolution must be >= 2");
  if (!(hi[0] > lo[0]) || !(hi[1] > lo[1])) throw ConfigError("portrait bounds are empty");
  const FieldEvaluator eval(model);
  PhasePortrait P;
  P.lo = lo;
  P.hi = hi;
  P.resolution = resolution;
  const auto n = static_cast<std::size_t>(resolution);
  P.f1.resize(n * n);
  P.f2.resize(n * n);
#pragma omp parallel for
  for (int i = 0; i < resolution; ++i) {
    double f[2];
    for (int k = 0; k < resolution; ++k) {
      const double x[2] = {P.x1(i), P.x2(k)};
      eval(x, f);
      P.f1[i * n + k] = f[0];
      P.f2[i * n + k] = f[1];
    }
  }

  // A component changes sign in a cell when its corner values bracket zero.
  const int c = resolution - 1;
  std::vector<char> flagged(static_cast<std::size_t>(c) * c, 0);
  auto brackets = [&](const std::vector<double>& f, int i, int k) {
    const double v[4] = {f[i * n + k], f[(i + 1) * n + k], f[i * n + k + 1],
                         f[(i + 1) * n + k + 1]};
    return *std::min_element(v, v + 4) <= 0.0 && *std::max_element(v, v + 4) >= 0.0;
  };
  std::size_t count = 0;
  for (int i = 0; i < c; ++i) {
    for (int k = 0; k < c; ++k) {
      if (brackets(P.f1, i, k) && brackets(P.f2, i, k)) {
        flagged[i * c + k] = 1;
        ++count;
      }
    }
  }
  if (count == flagged.size()) {
    P.degenerate = true;
    return P;
  }

  // Merge 8-connected flagged cells; report the centroid of each group.
  std::vector<char> seen(flagged.size(), 0);
  for (int start = 0; start < c * c; ++start) {
    if (!flagged[start] || seen[start]) continue;
    std::vector<int> stack{start};
    seen[start] = 1;
    double sx = 0.0, sy = 0.0;
    std::size_t cells = 0;
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      const int i = cell / c, k = cell % c;
      sx += 0.5 * (P.x1(i) + P.x1(i + 1));
      sy += 0.5 * (P.x2(k) + P.x2(k + 1));
      ++cells;
      for (int di = -1; di <= 1; ++di) {
        for (int dk = -1; dk <= 1; ++dk) {
          const int a = i + di, b = k + dk;
          if (a < 0 || b < 0 || a >= c || b >= c) continue;
          const int nb = a * c + b;
          if (flagged[nb] && !seen[nb]) {
            seen[nb] = 1;
            stack.push_back(nb);
          }
        }
      }
    }
    FixedPointCandidate fp;
    fp.x = {sx / cells, sy / cells};
    fp.cells = cells;
    fp.kind = classify(eval, fp.x);
    P.fixed_points.push_back(fp);
  }
  return P;
}

void write_portrait_csv(const PhasePortrait& P, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "x1,x2,f1,f2\n";
  const auto n = static_cast<std::size_t>(P.resolution);
  for (int i = 0; i < P.resolution; ++i) {
    for (int k = 0; k < P.resolution; ++k) {
      out << format_double(P.x1(i)) << ',' << format_double(P.x2(k)) << ','
          << format_double(P.f1[i * n + k]) << ',' << format_double(P.f2[i * n + k]) << '\n';
    }
  }
}

void write_fixed_points_csv(const PhasePortrait& P, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  if (P.degenerate) {
    out << "# degenerate: every cell changes sign in both components\n";
  }
  out << "x1,x2,kind,cells\n";
  for (const auto& fp : P.fixed_points) {
    out << format_double(fp.x[0]) << ',' << format_double(fp.x[1]) << ',' << to_string(fp.kind)
        << ',' << fp.cells << '\n';
  }
}

}  // namespace cfid
