#include "cfid/simulator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cfid/stable_noise.hpp"
#include "cfid/text_io.hpp"

namespace cfid {

namespace {

struct BuiltinInfo {
  const char* name;
  DriftKind kind;
  int dim;  // 0: any
};

constexpr BuiltinInfo kBuiltins[] = {
    {"zero", DriftKind::zero, 0},
    {"linear", DriftKind::linear, 0},
    {"sine1d", DriftKind::sine1d, 1},
    {"doublewell1d", DriftKind::doublewell1d, 1},
    {"trig_singlewell2d", DriftKind::trig_singlewell2d, 2},
    {"trig_doublewell2d", DriftKind::trig_doublewell2d, 2},
    {"poly_doublewell2d", DriftKind::poly_doublewell2d, 2},
    {"maier_stein", DriftKind::maier_stein, 2},
};

}  // namespace

DriftSpec::DriftSpec(DriftKind kind, int dim) : kind_(kind), dim_(dim) {
  if (kind == DriftKind::fourier) throw ConfigError("fourier drift needs a model");
  for (const auto& b : kBuiltins) {
    if (b.kind == kind && b.dim != 0 && b.dim != dim) {
      throw ConfigError(std::string("drift ") + b.name + " requires dim = " +
                        std::to_string(b.dim));
    }
  }
  if (dim < 1 || dim > kMaxDim) throw ConfigError("unsupported drift dimension");
}

DriftSpec::DriftSpec(const FourierDrift& model)
    : kind_(DriftKind::fourier),
      dim_(model.dim()),
      model_(std::make_shared<const FourierDrift>(model)),
      evaluator_(std::make_shared<const FieldEvaluator>(model)) {}

DriftSpec DriftSpec::builtin(const std::string& name, int dim) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) return DriftSpec(b.kind, b.dim == 0 ? dim : b.dim);
  }
  throw ConfigError("unknown drift '" + name + "'");
}

std::string DriftSpec::name() const {
  if (kind_ == DriftKind::fourier) return "fourier";
  for (const auto& b : kBuiltins) {
    if (b.kind == kind_) return b.name;
  }
  return "unknown";
}

void DriftSpec::operator()(std::span<const double> x, std::span<double> out) const {
  switch (kind_) {
    case DriftKind::zero:
      for (int m = 0; m < dim_; ++m) out[m] = 0.0;
      return;
    case DriftKind::linear:
      for (int m = 0; m < dim_; ++m) out[m] = -x[m];
      return;
    case DriftKind::sine1d:
      out[0] = std::sin(x[0]);
      return;
    case DriftKind::doublewell1d:
      out[0] = x[0] - x[0] * x[0] * x[0];
      return;
    case DriftKind::trig_singlewell2d:
      out[0] = std::sin(x[1]);
      out[1] = -std::sin(x[0]);
      return;
    case DriftKind::trig_doublewell2d: {
      // V(x) = ((sin(x/2))^2 - 4)^2 / 10, V'(x) = ((sin(x/2))^2 - 4) sin(x) / 10
      const double sh = std::sin(0.5 * x[0]);
      out[0] = std::sin(x[1]);
      out[1] = -(sh * sh - 4.0) * std::sin(x[0]) / 10.0;
      return;
    }
    case DriftKind::poly_doublewell2d:
      // V(x) = (x^2 - 4)^2 / 10 with dissipation -x_1 / 4
      out[0] = x[1];
      out[1] = 0.4 * x[0] * (4.0 - x[0] * x[0]) - 0.25 * x[0];
      return;
    case DriftKind::maier_stein:
      out[0] = x[0] - x[0] * x[0] * x[0] - x[0] * x[1] * x[1];
      out[1] = -(1.0 + x[0] * x[0]) * x[1];
      return;
    case DriftKind::fourier:
      (*evaluator_)(x, out);
      return;
  }
}

VectorField DriftSpec::as_field() const {
  return [spec = *this](std::span<const double> x, std::span<double> out) { spec(x, out); };
}

int init_dim(const InitialCondition& init) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointInit>) {
          return static_cast<int>(v.x0.size());
        } else {
          return v.dim;
        }
      },
      init);
}

std::string describe(const InitialCondition& init) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointInit>) {
          return "point:" + text::join_doubles(v.x0, ';');
        } else if constexpr (std::is_same_v<T, GaussianFirstInit>) {
          return "gaussian:" + text::format_double(v.mean) + ";" +
                 text::format_double(v.stddev);
        } else {
          return "grid:" + text::format_double(v.lo) + ";" + text::format_double(v.hi) + ";" +
                 std::to_string(v.per_axis);
        }
      },
      init);
}

std::size_t Dataset::valid_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.valid ? 1 : 0;
  return n;
}

std::vector<const Trajectory*> Dataset::valid_trajectories() const {
  std::vector<const Trajectory*> out;
  for (const auto& t : trajectories) {
    if (!t.valid) continue;
    if (t.rows(dim) != observations) {
      throw ConfigError("valid trajectory with " + std::to_string(t.rows(dim)) +
                        " rows, expected " + std::to_string(observations));
    }
    out.push_back(&t);
  }
  return out;
}

std::vector<double> euler_maruyama_step(std::span<const double> x, const DriftSpec& drift,
                                        std::span<const double> g, double h,
                                        std::span<const double> noise) {
  const int d = drift.dim();
  std::vector<double> fx(static_cast<std::size_t>(d));
  drift(x, fx);
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) out[m] = x[m] + fx[m] * h + g[m] * noise[m];
  return out;
}

namespace {

std::vector<double> initial_state(const InitialCondition& init, std::size_t k,
                                  StreamRng& rng) {
  return std::visit(
      [&](const auto& v) -> std::vector<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointInit>) {
          return v.x0;
        } else if constexpr (std::is_same_v<T, GaussianFirstInit>) {
          std::vector<double> x(static_cast<std::size_t>(v.dim), 0.0);
          x[0] = v.mean + v.stddev * rng.normal();
          return x;
        } else {
          std::vector<double> x(static_cast<std::size_t>(v.dim));
          std::size_t count = 1;
          for (int a = 0; a < v.dim; ++a) count *= static_cast<std::size_t>(v.per_axis);
          std::size_t node = k % count;
          const double step = v.per_axis > 1 ? (v.hi - v.lo) / (v.per_axis - 1) : 0.0;
          for (int a = v.dim - 1; a >= 0; --a) {
            x[a] = v.lo + static_cast<double>(node % v.per_axis) * step;
            node /= v.per_axis;
          }
          return x;
        }
      },
      init);
}

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

Dataset generate_dataset(const DriftSpec& drift, const SimulationConfig& config) {
  const int d = drift.dim();
  check_alpha(config.alpha);
  if (static_cast<int>(config.g.size()) != d) {
    throw ConfigError("diffusion vector g has " + std::to_string(config.g.size()) +
                      " entries, drift dimension is " + std::to_string(d));
  }
  if (init_dim(config.init) != d) throw ConfigError("initial condition dimension mismatch");
  if (!(config.fine_step > 0.0)) throw DomainError("fine_step must be positive");
  if (config.save_stride < 1 || config.total_steps < config.save_stride) {
    throw ConfigError("need 1 <= save_stride <= total_steps");
  }

  const auto saves = static_cast<std::size_t>(config.total_steps / config.save_stride);
  const long long fine_steps = static_cast<long long>(saves) * config.save_stride;
  const double noise_scale = std::pow(config.fine_step, 1.0 / config.alpha);

  Dataset ds;
  ds.dim = d;
  ds.dt = config.fine_step * static_cast<double>(config.save_stride);
  ds.observations = saves + 1;
  ds.trajectories.resize(config.n_trajectories);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(config.n_trajectories); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    StreamRng rng(config.seed, config.stream, k);
    Trajectory& traj = ds.trajectories[k];
    std::vector<double> x = initial_state(config.init, k, rng);
    std::vector<double> fx(static_cast<std::size_t>(d));
    traj.states.reserve((saves + 1) * static_cast<std::size_t>(d));
    traj.states.insert(traj.states.end(), x.begin(), x.end());
    for (long long n = 1; n <= fine_steps; ++n) {
      drift(x, fx);
      for (int m = 0; m < d; ++m) {
        x[m] += fx[m] * config.fine_step +
                config.g[m] * noise_scale * standard_stable(config.alpha, rng);
      }
      if (!all_finite(x)) {
        traj.valid = false;
        break;
      }
      if (n % config.save_stride == 0) traj.states.insert(traj.states.end(), x.begin(), x.end());
    }
  }

  ds.provenance["drift"] = drift.name();
  ds.provenance["alpha"] = text::format_double(config.alpha);
  ds.provenance["g"] = text::join_doubles(config.g, ';');
  ds.provenance["seed"] = std::to_string(config.seed);
  ds.provenance["stream"] = std::to_string(config.stream);
  ds.provenance["fine_step"] = text::format_double(config.fine_step);
  ds.provenance["total_steps"] = std::to_string(config.total_steps);
  ds.provenance["save_stride"] = std::to_string(config.save_stride);
  ds.provenance["init"] = describe(config.init);
  return ds;
}

Dataset filter_box(const Dataset& ds, std::span<const double> lo, std::span<const double> hi) {
  const int d = ds.dim;
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d) {
    throw ConfigError("filter box dimension mismatch");
  }
  for (int m = 0; m < d; ++m) {
    if (!(lo[m] < hi[m])) throw ConfigError("filter box needs lo < hi componentwise");
  }
  Dataset out;
  out.dim = d;
  out.dt = ds.dt;
  out.observations = ds.observations;
  out.provenance = ds.provenance;
  for (const auto& t : ds.trajectories) {
    if (!t.valid || t.rows(d) != ds.observations) continue;
    bool inside = true;
    for (std::size_t i = 0; i < t.states.size() && inside; ++i) {
      const double v = t.states[i];
      const int m = static_cast<int>(i % static_cast<std::size_t>(d));
      inside = std::isfinite(v) && v >= lo[m] && v <= hi[m];
    }
    if (inside) out.trajectories.push_back(t);
  }
  if (out.trajectories.empty()) {
    throw EmptyDatasetError("no trajectory stays inside the filter box");
  }
  out.provenance["filter_box"] = text::join_doubles(std::vector<double>(lo.begin(), lo.end()), ';') +
                                 "|" +
                                 text::join_doubles(std::vector<double>(hi.begin(), hi.end()), ';');
  out.provenance["retained"] =
      std::to_string(out.trajectories.size()) + "/" + std::to_string(ds.trajectories.size());
  return out;
}

// ---------------------------------------------------------------------------
// File format:
//   # cfid dataset v1
//   dim = <d>
//   trajectories = <n_T>
//   observations = <N + 1>
//   dt = <dt>
//   provenance.<key> = <value>
//   @trajectory <k> valid=<0|1> rows=<r>
//   x_1,...,x_d            (r rows)

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# cfid dataset v1\n";
  out << "dim = " << ds.dim << "\n";
  out << "trajectories = " << ds.trajectories.size() << "\n";
  out << "observations = " << ds.observations << "\n";
  out << "dt = " << text::format_double(ds.dt) << "\n";
  for (const auto& [key, value] : ds.provenance) {
    out << "provenance." << key << " = " << value << "\n";
  }
  for (std::size_t k = 0; k < ds.trajectories.size(); ++k) {
    const auto& t = ds.trajectories[k];
    const std::size_t rows = t.rows(ds.dim);
    out << "@trajectory " << k << " valid=" << (t.valid ? 1 : 0) << " rows=" << rows << "\n";
    for (std::size_t j = 0; j < rows; ++j) {
      for (int m = 0; m < ds.dim; ++m) {
        if (m) out << ',';
        out << text::format_double(t.states[j * ds.dim + m]);
      }
      out << '\n';
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Dataset ds;
  std::size_t expected_trajectories = 0;
  bool have_dim = false, have_traj = false, have_obs = false, have_dt = false;
  std::string line;
  std::size_t line_no = 0;
  const auto where = [&](std::size_t n) { return path.string() + ":" + std::to_string(n); };

  Trajectory* current = nullptr;
  std::size_t current_index = 0;
  std::size_t rows_expected = 0;
  std::size_t rows_read = 0;
  const auto close_block = [&](std::size_t n) {
    if (current && rows_read != rows_expected) {
      throw ParseError(where(n) + ": trajectory " + std::to_string(current_index) + " has " +
                       std::to_string(rows_read) + " rows, header says " +
                       std::to_string(rows_expected));
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '@') {
      close_block(line_no);
      if (!(have_dim && have_traj && have_obs && have_dt)) {
        throw ParseError(where(line_no) + ": trajectory block before complete header");
      }
      std::istringstream hs{std::string(body)};
      std::string tag, valid_field, rows_field;
      long long index = -1;
      hs >> tag >> index >> valid_field >> rows_field;
      if (tag != "@trajectory" || valid_field.rfind("valid=", 0) != 0 ||
          rows_field.rfind("rows=", 0) != 0) {
        throw ParseError(where(line_no) + ": malformed trajectory header '" + line + "'");
      }
      if (index != static_cast<long long>(ds.trajectories.size())) {
        throw ParseError(where(line_no) + ": trajectory index " + std::to_string(index) +
                         " out of order");
      }
      ds.trajectories.emplace_back();
      current = &ds.trajectories.back();
      current_index = static_cast<std::size_t>(index);
      current->valid = text::parse_int(valid_field.substr(6), where(line_no)) != 0;
      rows_expected = static_cast<std::size_t>(text::parse_int(rows_field.substr(5), where(line_no)));
      rows_read = 0;
      if (current->valid && rows_expected != ds.observations) {
        throw ParseError(where(line_no) + ": valid trajectory " + std::to_string(index) +
                         " has " + std::to_string(rows_expected) + " rows, expected " +
                         std::to_string(ds.observations));
      }
      current->states.reserve(rows_expected * static_cast<std::size_t>(ds.dim));
      continue;
    }
    if (current == nullptr) {
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(where(line_no) + ": expected 'key = value', got '" + line + "'");
      }
      const auto key = text::trim(body.substr(0, eq));
      const auto value = text::trim(body.substr(eq + 1));
      if (key == "dim") {
        ds.dim = static_cast<int>(text::parse_int(value, where(line_no)));
        if (ds.dim < 1 || ds.dim > kMaxDim) throw ParseError(where(line_no) + ": bad dim");
        have_dim = true;
      } else if (key == "trajectories") {
        expected_trajectories = static_cast<std::size_t>(text::parse_int(value, where(line_no)));
        have_traj = true;
      } else if (key == "observations") {
        ds.observations = static_cast<std::size_t>(text::parse_int(value, where(line_no)));
        have_obs = true;
      } else if (key == "dt") {
        ds.dt = text::parse_double(value, where(line_no));
        have_dt = true;
      } else if (key.rfind("provenance.", 0) == 0) {
        ds.provenance[std::string(key.substr(11))] = std::string(value);
      } else {
        throw ParseError(where(line_no) + ": unknown header key '" + std::string(key) + "'");
      }
      continue;
    }
    const auto fields = text::split(body, ',');
    if (static_cast<int>(fields.size()) != ds.dim) {
      throw ParseError(where(line_no) + ": trajectory " + std::to_string(current_index) +
                       " row " + std::to_string(rows_read) + " has " +
                       std::to_string(fields.size()) + " columns, expected " +
                       std::to_string(ds.dim));
    }
    if (rows_read >= rows_expected) {
      throw ParseError(where(line_no) + ": trajectory " + std::to_string(current_index) +
                       " has more rows than declared");
    }
    for (auto f : fields) current->states.push_back(text::parse_double(f, where(line_no)));
    ++rows_read;
  }
  close_block(line_no);
  if (!(have_dim && have_traj && have_obs && have_dt)) {
    throw ParseError(path.string() + ": incomplete header");
  }
  if (ds.trajectories.size() != expected_trajectories) {
    throw ParseError(path.string() + ": header declares " + std::to_string(expected_trajectories) +
                     " trajectories, found " + std::to_string(ds.trajectories.size()));
  }
  return ds;
}

}  // namespace cfid
