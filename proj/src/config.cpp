#include "cfid/config.hpp"

#include <fstream>
#include <sstream>

#include "cfid/text_io.hpp"

namespace cfid {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"sim.drift", "sine1d",
       "zero, linear, sine1d, doublewell1d, trig_singlewell2d, trig_doublewell2d, "
       "poly_doublewell2d, maier_stein or fourier"},
      {"sim.dim", "1", "dimension for zero and linear drifts"},
      {"sim.fourier_coefficients", "", "coefficient CSV when sim.drift = fourier"},
      {"sim.alpha", "1", "stability index, 1 <= alpha <= 2"},
      {"sim.g", "0.25", "diffusion per axis (one value is broadcast)"},
      {"sim.init", "point", "point, gaussian_first or grid"},
      {"sim.x0", "0", "start point for sim.init = point (one value is broadcast)"},
      {"sim.init_mean", "0", "gaussian_first: mean of the first coordinate"},
      {"sim.init_std", "0.3333333333333333", "gaussian_first: std of the first coordinate"},
      {"sim.grid_lo", "-1", "grid init: lower corner"},
      {"sim.grid_hi", "1", "grid init: upper corner"},
      {"sim.grid_per_axis", "10", "grid init: nodes per axis"},
      {"sim.fine_step", "0.001", "Euler-Maruyama step"},
      {"sim.total_steps", "4000", "fine steps"},
      {"sim.save_stride", "100", "fine steps between saved states"},
      {"sim.n_trajectories", "100", "trajectories"},
      {"sim.seed", "1", "noise seed"},
      {"sim.filter_box", "", "drop trajectories leaving [-b, b]^d (empty: keep all)"},
      {"grid.L", "2", "period multiplier, shared by grid and model"},
      {"grid.M", "1028", "grid half-width in points per axis"},
      {"grid.n_L", "8", "grid points per drift mode spacing"},
      {"loss.mode", "averaged_ecf", "averaged_ecf or per_trajectory"},
      {"loss.mu", "0", "L1 weight"},
      {"loss.gaussian_reg", "0", "c in exp(-c |s|^2) applied to every empirical CF"},
      {"loss.nu", "100", "propagator steps per observation interval"},
      {"loss.decay", "componentwise", "componentwise, inner_product or printed_scheme"},
      {"loss.checkpoint_stride", "0", "keep every k-th inner state in the backward pass"},
      {"loss.first_pair", "0", "index of the first snapshot pair entering the loss"},
      {"train.J", "4", "mode cutoff"},
      {"train.symmetry", "none", "parities as m:axis:parity triples, or maier_stein"},
      {"train.grad_tol", "1e-9", "gradient norm tolerance"},
      {"train.step_tol", "1e-9", "trust radius tolerance"},
      {"train.max_iterations", "200", "iteration cap"},
      {"train.initial_radius", "1", "initial trust radius"},
      {"train.initial", "", "coefficient CSV for the initial guess (empty: zeros)"},
      {"quadrature.panels", "0", "Gauss-Legendre panels per axis for true coefficients"},
      {"eval.n_test", "1000", "test trajectories per set"},
      {"eval.seed", "7", "seed for the test sets"},
      {"scan.lo", "0", "first scan value"},
      {"scan.hi", "1", "last scan value"},
      {"scan.points", "101", "scan values"},
      {"portrait.lo", "-3,-3", "lower corner"},
      {"portrait.hi", "3,3", "upper corner"},
      {"portrait.resolution", "101", "points per axis"},
  };
  return keys;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : config_schema()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  set(std::string(text::trim(assignment.substr(0, eq))),
      std::string(text::trim(assignment.substr(eq + 1))));
}

Config Config::parse(const std::string& body, const std::string& origin) {
  Config c;
  std::istringstream in(body);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string_view content = text::trim(std::string_view(line).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(text::trim(content.substr(0, eq)));
    if (!find_key(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown config key '" + key +
                        "'");
    }
    c.values_[key] = std::string(text::trim(content.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get(const std::string& key) const {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + key + "'");
  const auto it = values_.find(key);
  return it != values_.end() ? it->second : k->default_value;
}

double Config::get_double(const std::string& key) const {
  try {
    return text::parse_double(get(key), key);
  } catch (const ParseError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

long long Config::get_int(const std::string& key) const {
  try {
    return text::parse_int(get(key), key);
  } catch (const ParseError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  try {
    return text::parse_double_list(get(key), key);
  } catch (const ParseError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::string Config::dump() const {
  std::string out;
  for (const auto& k : config_schema()) out += k.name + " = " + get(k.name) + "\n";
  return out;
}

namespace {

std::vector<double> broadcast(const Config& c, const std::string& key, int dim) {
  auto v = c.get_doubles(key);
  if (v.size() == 1) v.assign(static_cast<std::size_t>(dim), v[0]);
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError("config key '" + key + "' needs 1 or " + std::to_string(dim) + " values");
  }
  return v;
}

int positive(const Config& c, const std::string& key) {
  const long long v = c.get_int(key);
  if (v < 1) throw ConfigError("config key '" + key + "' must be >= 1");
  return static_cast<int>(v);
}

}  // namespace

DriftSpec drift_spec(const Config& c) {
  const std::string name = c.get("sim.drift");
  if (name == "fourier") {
    const std::string path = c.get("sim.fourier_coefficients");
    if (path.empty()) throw ConfigError("config key 'sim.fourier_coefficients' is required");
    return DriftSpec(read_coefficients_csv(path));
  }
  try {
    return DriftSpec::builtin(name, positive(c, "sim.dim"));
  } catch (const ConfigError& e) {
    throw ConfigError("config key 'sim.drift': " + std::string(e.what()));
  }
}

SimulationConfig simulation_config(const Config& c) {
  const DriftSpec drift = drift_spec(c);
  const int d = drift.dim();
  SimulationConfig s;
  s.alpha = c.get_double("sim.alpha");
  s.g = broadcast(c, "sim.g", d);
  const std::string init = c.get("sim.init");
  if (init == "point") {
    s.init = PointInit{broadcast(c, "sim.x0", d)};
  } else if (init == "gaussian_first") {
    s.init = GaussianFirstInit{d, c.get_double("sim.init_mean"), c.get_double("sim.init_std")};
  } else if (init == "grid") {
    s.init = GridInit{d, c.get_double("sim.grid_lo"), c.get_double("sim.grid_hi"),
                      positive(c, "sim.grid_per_axis")};
  } else {
    throw ConfigError("config key 'sim.init': unknown initial condition '" + init + "'");
  }
  s.fine_step = c.get_double("sim.fine_step");
  s.total_steps = c.get_int("sim.total_steps");
  s.save_stride = c.get_int("sim.save_stride");
  s.n_trajectories = static_cast<std::size_t>(positive(c, "sim.n_trajectories"));
  s.seed = static_cast<std::uint64_t>(c.get_int("sim.seed"));
  return s;
}

LossConfig loss_config(const Config& c, int dim) {
  LossConfig l;
  l.mode = parse_loss_mode(c.get("loss.mode"));
  l.mu = c.get_double("loss.mu");
  l.gaussian_reg = c.get_double("loss.gaussian_reg");
  l.nu = positive(c, "loss.nu");
  l.decay = parse_decay_convention(c.get("loss.decay"));
  l.checkpoint_stride = static_cast<int>(c.get_int("loss.checkpoint_stride"));
  l.first_pair = static_cast<std::size_t>(c.get_int("loss.first_pair"));
  l.grid = SpectralGrid(dim, positive(c, "grid.L"), positive(c, "grid.M"), positive(c, "grid.n_L"));
  l.alpha = c.get_double("sim.alpha");
  l.g = broadcast(c, "sim.g", dim);
  try {
    l.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("loss settings: " + std::string(e.what()));
  }
  return l;
}

TrainConfig train_config(const Config& c, int dim) {
  TrainConfig t;
  t.J = static_cast<int>(c.get_int("train.J"));
  const std::string sym = c.get("train.symmetry");
  t.symmetry = sym == "maier_stein" ? SymmetrySpec::maier_stein() : SymmetrySpec::parse(sym, dim);
  t.optimizer.grad_tol = c.get_double("train.grad_tol");
  t.optimizer.step_tol = c.get_double("train.step_tol");
  t.optimizer.max_iterations = positive(c, "train.max_iterations");
  t.optimizer.initial_radius = c.get_double("train.initial_radius");
  if (const std::string init = c.get("train.initial"); !init.empty()) {
    t.initial = read_coefficients_csv(init);
  }
  t.seed = static_cast<std::uint64_t>(c.get_int("sim.seed"));
  return t;
}

FourierDrift truth_coefficients(const Config& c) {
  const DriftSpec drift = drift_spec(c);
  const int J = static_cast<int>(c.get_int("train.J"));
  const int L = positive(c, "grid.L");
  QuadratureOptions q;
  q.panels = static_cast<int>(c.get_int("quadrature.panels"));
  return coefficients_by_quadrature(drift.as_field(), J, L, drift.dim(), q);
}

std::vector<double> ScanSettings::values() const {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    v[i] = points == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(points - 1);
  }
  return v;
}

ScanSettings scan_settings(const Config& c) {
  return {c.get_double("scan.lo"), c.get_double("scan.hi"), positive(c, "scan.points")};
}

PortraitSettings portrait_settings(const Config& c) {
  const auto lo = broadcast(c, "portrait.lo", 2);
  const auto hi = broadcast(c, "portrait.hi", 2);
  return {{lo[0], lo[1]}, {hi[0], hi[1]}, positive(c, "portrait.resolution")};
}

}  // namespace cfid
