#include "cfid/drift_model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cfid/text_io.hpp"

namespace cfid {

// ---------------------------------------------------------------------------
// SymmetrySpec

SymmetrySpec::SymmetrySpec(int dim)
    : dim_(dim), parity_(static_cast<std::size_t>(dim * dim), Parity::none) {}

SymmetrySpec SymmetrySpec::maier_stein() {
  SymmetrySpec spec(2);
  spec.set(0, 0, Parity::odd);
  spec.set(0, 1, Parity::even);
  spec.set(1, 0, Parity::even);
  spec.set(1, 1, Parity::odd);
  return spec;
}

SymmetrySpec SymmetrySpec::parse(const std::string& text, int dim) {
  SymmetrySpec spec(dim);
  const auto body = text::trim(text);
  if (body.empty() || body == "none") return spec;
  if (body == "maier_stein") {
    if (dim != 2) throw ConfigError("maier_stein symmetry requires dim = 2");
    return maier_stein();
  }
  for (auto item : text::split(body, ',')) {
    auto parts = text::split(text::trim(item), ':');
    if (parts.size() != 3) {
      throw ConfigError("symmetry entry '" + std::string(item) + "' is not m:axis:parity");
    }
    const auto m = text::parse_int(parts[0], "symmetry component") - 1;
    const auto axis = text::parse_int(parts[1], "symmetry axis") - 1;
    if (m < 0 || m >= dim || axis < 0 || axis >= dim) {
      throw ConfigError("symmetry entry '" + std::string(item) + "' out of range");
    }
    const auto p = text::trim(parts[2]);
    Parity parity = Parity::none;
    if (p == "odd") {
      parity = Parity::odd;
    } else if (p == "even") {
      parity = Parity::even;
    } else if (p != "none") {
      throw ConfigError("unknown parity '" + std::string(p) + "'");
    }
    spec.set(static_cast<int>(m), static_cast<int>(axis), parity);
  }
  return spec;
}

bool SymmetrySpec::active() const {
  for (auto p : parity_) {
    if (p != Parity::none) return true;
  }
  return false;
}

std::string SymmetrySpec::to_string() const {
  if (!active()) return "none";
  std::string out;
  for (int m = 0; m < dim_; ++m) {
    for (int axis = 0; axis < dim_; ++axis) {
      const auto p = at(m, axis);
      if (p == Parity::none) continue;
      if (!out.empty()) out += ',';
      out += std::to_string(m + 1) + ":" + std::to_string(axis + 1) + ":" +
             (p == Parity::odd ? "odd" : "even");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// FourierDrift

FourierDrift::FourierDrift(int dim, int J, int L) : modes_(dim, J), L_(L) {
  if (J < 0) throw ConfigError("mode cutoff J must be non-negative");
  if (L < 1) throw ConfigError("period multiplier L must be positive");
  coeffs_.assign(modes_.size() * static_cast<std::size_t>(dim), cplx{});
}

double FourierDrift::reality_defect() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < num_modes(); ++p) {
    const auto q = modes_.mirror(p);
    for (int m = 0; m < dim(); ++m) {
      worst = std::max(worst, std::abs(coeff(p, m) - std::conj(coeff(q, m))));
    }
  }
  return worst;
}

double FourierDrift::l1_norm() const {
  double total = 0.0;
  for (const auto& c : coeffs_) total += std::abs(c);
  return total;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// phases[axis][j + J] = exp(i j x_axis / L)
using PhaseTable = std::array<std::vector<cplx>, kMaxDim>;

PhaseTable axis_phases(std::span<const double> x, int dim, int J, int L) {
  PhaseTable table;
  for (int axis = 0; axis < dim; ++axis) {
    table[axis].resize(static_cast<std::size_t>(2 * J + 1));
    for (int j = -J; j <= J; ++j) {
      table[axis][j + J] = std::polar(1.0, j * x[axis] / L);
    }
  }
  return table;
}

cplx mode_phase(const PhaseTable& table, const MultiIndex& j, int dim, int J) {
  cplx z = table[0][j[0] + J];
  for (int axis = 1; axis < dim; ++axis) z *= table[axis][j[axis] + J];
  return z;
}

}  // namespace

FieldEvaluator::FieldEvaluator(const FourierDrift& model)
    : dim_(model.dim()), J_(model.J()), L_(model.L()) {
  const double scale = std::max(1.0, model.l1_norm());
  if (model.reality_defect() > 1e-12 * scale) {
    throw ConstraintError("Fourier drift violates the reality constraint (defect " +
                          text::format_double(model.reality_defect()) + ")");
  }
  const auto& modes = model.modes();
  for (std::size_t p = modes.center(); p < modes.size(); ++p) {
    const auto j = modes.unflatten(p);
    if (!IndexBox::is_nonnegative_half(j, dim_)) continue;
    indices_.push_back(j);
    weights_.push_back(p == modes.center() ? 1.0 : 2.0);
    for (int m = 0; m < dim_; ++m) coeffs_.push_back(model.coeff(p, m));
  }
}

void FieldEvaluator::operator()(std::span<const double> x, std::span<double> out) const {
  const auto table = axis_phases(x, dim_, J_, L_);
  for (int m = 0; m < dim_; ++m) out[m] = 0.0;
  for (std::size_t t = 0; t < indices_.size(); ++t) {
    const cplx z = mode_phase(table, indices_[t], dim_, J_);
    for (int m = 0; m < dim_; ++m) {
      out[m] += weights_[t] * (coeffs_[t * dim_ + m] * z).real();
    }
  }
}

void FieldEvaluator::jacobian(std::span<const double> x, std::span<double> out) const {
  const auto table = axis_phases(x, dim_, J_, L_);
  for (int i = 0; i < dim_ * dim_; ++i) out[i] = 0.0;
  for (std::size_t t = 0; t < indices_.size(); ++t) {
    const cplx z = mode_phase(table, indices_[t], dim_, J_);
    for (int m = 0; m < dim_; ++m) {
      const cplx cz = coeffs_[t * dim_ + m] * z * cplx(0.0, 1.0);
      for (int l = 0; l < dim_; ++l) {
        out[m * dim_ + l] += weights_[t] * cz.real() * indices_[t][l] / L_;
      }
    }
  }
}

std::vector<double> evaluate_field(const FourierDrift& model, std::span<const double> x) {
  const int d = model.dim();
  if (static_cast<int>(x.size()) != d) throw ConfigError("evaluate_field: dimension mismatch");
  const auto table = axis_phases(x, d, model.J(), model.L());
  std::vector<cplx> sum(static_cast<std::size_t>(d));
  for (std::size_t p = 0; p < model.num_modes(); ++p) {
    const cplx z = mode_phase(table, model.modes().unflatten(p), d, model.J());
    for (int m = 0; m < d; ++m) sum[m] += model.coeff(p, m) * z;
  }
  const double tol = 1e-12 * std::max(1.0, model.l1_norm());
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    if (std::abs(sum[m].imag()) > tol) {
      throw ConstraintError("drift component " + std::to_string(m) +
                            " has imaginary residue " +
                            text::format_double(sum[m].imag()));
    }
    out[m] = sum[m].real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

ComplexVector coefficient_convolution(const FourierDrift& model) {
  const int d = model.dim();
  const IndexBox& modes = model.modes();
  const IndexBox conv(d, 2 * model.J());
  ComplexVector out(conv.size() * static_cast<std::size_t>(d * d));
  for (std::size_t kf = 0; kf < conv.size(); ++kf) {
    const MultiIndex k = conv.unflatten(kf);
    cplx* block = &out[kf * d * d];
    for (std::size_t jf = 0; jf < modes.size(); ++jf) {
      const MultiIndex j = modes.unflatten(jf);
      MultiIndex rest{};
      for (int axis = 0; axis < d; ++axis) rest[axis] = k[axis] - j[axis];
      if (!modes.contains(rest)) continue;
      const std::size_t rf = modes.flatten(rest);
      for (int m = 0; m < d; ++m) {
        for (int mp = 0; mp < d; ++mp) {
          block[m * d + mp] += model.coeff(jf, m) * model.coeff(rf, mp);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetry projection

void project_symmetry_inplace(std::span<cplx> coeffs, const IndexBox& modes, int dim,
                              const SymmetrySpec& spec) {
  const std::size_t n = modes.size();
  // Reality: theta^{-j} = conj(theta^j).
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t q = modes.mirror(p);
    if (q < p) continue;
    for (int m = 0; m < dim; ++m) {
      cplx& a = coeffs[p * dim + m];
      cplx& b = coeffs[q * dim + m];
      if (p == q) {
        a = cplx(a.real(), 0.0);
      } else {
        const cplx v = (a + std::conj(b)) / 2.0;
        a = v;
        b = std::conj(v);
      }
    }
  }
  if (!spec.active()) return;
  if (spec.dim() != dim) throw ConfigError("symmetry spec dimension does not match model");
  for (int m = 0; m < dim; ++m) {
    for (int axis = 0; axis < dim; ++axis) {
      const Parity parity = spec.at(m, axis);
      if (parity == Parity::none) continue;
      for (std::size_t p = 0; p < n; ++p) {
        MultiIndex j = modes.unflatten(p);
        j[axis] = -j[axis];
        const std::size_t q = modes.flatten(j);
        if (q < p) continue;
        cplx& a = coeffs[p * dim + m];
        cplx& b = coeffs[q * dim + m];
        if (parity == Parity::even) {
          if (p == q) continue;
          const cplx v = (a + b) / 2.0;
          a = v;
          b = v;
        } else {
          if (p == q) {
            a = cplx{};
            continue;
          }
          const cplx v = (a - b) / 2.0;
          a = v;
          b = -v;
        }
      }
    }
  }
}

FourierDrift project_symmetry(const FourierDrift& model, const SymmetrySpec& spec) {
  FourierDrift out = model;
  project_symmetry_inplace(out.coeffs(), out.modes(), out.dim(), spec);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

constexpr std::array<double, 4> kGaussNodes = {0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule composite_gauss(double lo, double hi, int panels) {
  Rule rule;
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (int i = 3; i >= 0; --i) {
      rule.nodes.push_back(mid - half * kGaussNodes[i]);
      rule.weights.push_back(half * kGaussWeights[i]);
    }
    for (int i = 0; i < 4; ++i) {
      rule.nodes.push_back(mid + half * kGaussNodes[i]);
      rule.weights.push_back(half * kGaussWeights[i]);
    }
  }
  return rule;
}

// Tensor-product rule applied axis by axis: each axis contracts its node index
// against exp(-i j x / L) for j in [-J, J].
ComplexVector quadrature_pass(const VectorField& f, int J, int L, int dim, int panels) {
  const double half_period = L * std::numbers::pi;
  const Rule rule = composite_gauss(-half_period, half_period, panels);
  const std::size_t n = rule.nodes.size();
  const std::size_t nmodes = static_cast<std::size_t>(2 * J + 1);

  std::size_t total = 1;
  for (int axis = 0; axis < dim; ++axis) total *= n;

  // Sample weighted field on the node grid, component-major.
  std::vector<ComplexVector> data(static_cast<std::size_t>(dim), ComplexVector(total));
  std::vector<double> x(static_cast<std::size_t>(dim));
  std::vector<double> fx(static_cast<std::size_t>(dim));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double weight = 1.0;
    for (int axis = dim - 1; axis >= 0; --axis) {
      const std::size_t i = rem % n;
      rem /= n;
      x[axis] = rule.nodes[i];
      weight *= rule.weights[i];
    }
    f(x, fx);
    for (int m = 0; m < dim; ++m) data[m][flat] = weight * fx[m];
  }

  std::vector<ComplexVector> phase(nmodes, ComplexVector(n));
  for (std::size_t j = 0; j < nmodes; ++j) {
    const int jj = static_cast<int>(j) - J;
    for (std::size_t i = 0; i < n; ++i) phase[j][i] = std::polar(1.0, -jj * rule.nodes[i] / L);
  }

  const double norm = std::pow(2.0 * half_period, -dim);
  std::vector<std::size_t> shape(static_cast<std::size_t>(dim), n);
  for (int m = 0; m < dim; ++m) {
    ComplexVector cur = std::move(data[m]);
    std::vector<std::size_t> cur_shape = shape;
    for (int axis = 0; axis < dim; ++axis) {
      std::size_t outer = 1;
      std::size_t inner = 1;
      for (int a = 0; a < axis; ++a) outer *= cur_shape[a];
      for (int a = axis + 1; a < dim; ++a) inner *= cur_shape[a];
      ComplexVector next(outer * nmodes * inner);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < nmodes; ++j) {
          cplx* dst = &next[(o * nmodes + j) * inner];
          for (std::size_t i = 0; i < n; ++i) {
            const cplx w = phase[j][i];
            const cplx* src = &cur[(o * n + i) * inner];
            for (std::size_t r = 0; r < inner; ++r) dst[r] += w * src[r];
          }
        }
      }
      cur = std::move(next);
      cur_shape[axis] = nmodes;
    }
    for (auto& v : cur) v *= norm;
    data[m] = std::move(cur);
  }

  const std::size_t nm = data[0].size();
  ComplexVector out(nm * static_cast<std::size_t>(dim));
  for (std::size_t p = 0; p < nm; ++p) {
    for (int m = 0; m < dim; ++m) out[p * dim + m] = data[m][p];
  }
  return out;
}

}  // namespace

FourierDrift coefficients_by_quadrature(const VectorField& f, int J, int L, int dim,
                                        const QuadratureOptions& options) {
  int panels = options.panels;
  if (panels <= 0) panels = dim == 1 ? 1024 : (dim == 2 ? 128 : 16);
  if (panels < 2) throw ConfigError("quadrature needs at least 2 panels");
  FourierDrift model(dim, J, L);
  const ComplexVector fine = quadrature_pass(f, J, L, dim, panels);
  const ComplexVector coarse = quadrature_pass(f, J, L, dim, panels / 2);
  double scale = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    scale = std::max(scale, std::abs(fine[i]));
    worst = std::max(worst, std::abs(fine[i] - coarse[i]));
  }
  if (worst > options.refinement_tol * scale) {
    throw Error("quadrature did not converge: refinement changed coefficients by " +
                text::format_double(worst));
  }
  std::copy(fine.begin(), fine.end(), model.coeffs().begin());
  return model;
}

// ---------------------------------------------------------------------------
// CSV

void write_coefficients_csv(const FourierDrift& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const int d = model.dim();
  out << "# cfid fourier drift\n";
  out << "# dim=" << d << ",J=" << model.J() << ",L=" << model.L() << "\n";
  for (int axis = 0; axis < d; ++axis) out << "j" << axis + 1 << ',';
  out << "component,real,imag\n";
  for (std::size_t p = 0; p < model.num_modes(); ++p) {
    const auto j = model.modes().unflatten(p);
    for (int m = 0; m < d; ++m) {
      for (int axis = 0; axis < d; ++axis) out << j[axis] << ',';
      const cplx c = model.coeff(p, m);
      out << m << ',' << text::format_double(c.real()) << ','
          << text::format_double(c.imag()) << '\n';
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

FourierDrift read_coefficients_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  int dim = -1;
  int J = -1;
  int L = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = text::trim(line);
    if (body.rfind("# dim=", 0) == 0) {
      for (auto item : text::split(body.substr(2), ',')) {
        auto kv = text::split(item, '=');
        if (kv.size() != 2) throw ParseError(path.string() + ": bad header '" + line + "'");
        const auto key = text::trim(kv[0]);
        const auto v = static_cast<int>(text::parse_int(kv[1], "coefficient header"));
        if (key == "dim") dim = v;
        else if (key == "J") J = v;
        else if (key == "L") L = v;
      }
      break;
    }
  }
  if (dim < 1 || J < 0 || L < 1) {
    throw ParseError(path.string() + ": missing '# dim=..,J=..,L=..' header");
  }
  FourierDrift model(dim, J, L);
  std::vector<bool> seen(model.coeffs().size(), false);
  bool header_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (header_row) {
      header_row = false;
      continue;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = text::split(body, ',');
    if (static_cast<int>(fields.size()) != dim + 3) {
      throw ParseError(where + ": expected " + std::to_string(dim + 3) + " fields, got " +
                       std::to_string(fields.size()));
    }
    MultiIndex j{};
    for (int axis = 0; axis < dim; ++axis) {
      j[axis] = static_cast<int>(text::parse_int(fields[axis], where));
    }
    if (!model.modes().contains(j)) throw ParseError(where + ": mode index out of range");
    const auto m = text::parse_int(fields[dim], where);
    if (m < 0 || m >= dim) throw ParseError(where + ": component out of range");
    const double re = text::parse_double(fields[dim + 1], where);
    const double im = text::parse_double(fields[dim + 2], where);
    const auto slot = model.modes().flatten(j) * dim + static_cast<std::size_t>(m);
    model.coeffs()[slot] = cplx(re, im);
    seen[slot] = true;
  }
  for (bool s : seen) {
    if (!s) throw ParseError(path.string() + ": coefficient table is incomplete");
  }
  return model;
}

}  // namespace cfid
