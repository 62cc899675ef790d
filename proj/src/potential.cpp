#include "gibbsym/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fstream>
#include <map>
#include <sstream>

#include "gibbsym/keyvalue.hpp"

namespace gibbsym {

namespace {

constexpr double kQuadTol = 1e-9;

// Integral of g over [a, b] with the absolute error estimate added, so the
// result does not under-estimate a nonnegative integrand.
double integrate_upper(const std::function<double(double)>& g, double a, double b) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 15, kQuadTol, &err);
  return val + err;
}

double integrate_upper_to_infinity(const std::function<double(double)>& g, double a) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  const double val = integrator.integrate(g, a, std::numeric_limits<double>::infinity(), kQuadTol, &err, &l1);
  return val + err;
}

}  // namespace

LinearTable::LinearTable(std::vector<double> x, std::vector<double> y, bool periodic)
    : x_(std::move(x)), y_(std::move(y)), periodic_(periodic) {
  if (x_.size() != y_.size() || x_.size() < 2) throw std::invalid_argument("table needs at least two (x, value) rows");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw std::invalid_argument("table entries must be finite");
    if (i > 0 && !(x_[i] > x_[i - 1])) throw std::invalid_argument("table abscissae must be strictly increasing");
  }
  if (periodic_) {
    if (x_.front() < 0.0 || x_.back() > kTwoPi + 1e-12) throw std::invalid_argument("periodic table must lie in [0, 2pi]");
    // A closing knot at 2*pi duplicates the knot at 0.
    if (std::abs(x_.back() - kTwoPi) <= 1e-12 && x_.front() == 0.0) {
      if (std::abs(y_.back() - y_.front()) > 1e-12) throw std::invalid_argument("periodic table is discontinuous at 0");
      x_.pop_back();
      y_.pop_back();
    }
    if (x_.size() < 2) throw std::invalid_argument("periodic table needs two distinct knots");
  } else if (x_.front() < 0.0) {
    throw std::invalid_argument("radial table must start at r >= 0");
  }
}

LinearTable LinearTable::read_csv(const std::filesystem::path& path, bool periodic) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table " + path.string());
  std::vector<double> xs, ys;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double a = 0, b = 0;
    if (!(fields >> a >> b)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw std::runtime_error(path.string() + ": malformed row: " + line);
    }
    first = false;
    xs.push_back(a);
    ys.push_back(b);
  }
  return LinearTable(std::move(xs), std::move(ys), periodic);
}

double LinearTable::operator()(double t) const {
  if (periodic_) {
    t = std::fmod(t, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t < x_.front() || t >= x_.back()) {
      // Wrap segment from the last knot to the first knot + 2*pi.
      const double x0 = x_.back();
      const double x1 = x_.front() + kTwoPi;
      const double tt = t < x_.front() ? t + kTwoPi : t;
      const double w = (tt - x0) / (x1 - x0);
      return y_.back() + w * (y_.front() - y_.back());
    }
  } else {
    if (t <= x_.front()) return y_.front();
    if (t > x_.back()) return 0.0;
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  if (hi >= x_.size()) return y_.back();
  const double w = (t - x_[lo]) / (x_[hi] - x_[lo]);
  return y_[lo] + w * (y_[hi] - y_[lo]);
}

PairPotentialModel PairPotentialModel::reference(double j0, double hardcore_radius) {
  if (!std::isfinite(j0)) throw std::invalid_argument("j0 must be finite");
  if (!(hardcore_radius >= 0.0)) throw std::invalid_argument("hard-core radius must be >= 0");
  PairPotentialModel m;
  m.kind_ = ModelKind::xy;
  m.j0_ = j0;
  m.hardcore_ = hardcore_radius;
  m.finalize();
  return m;
}

PairPotentialModel PairPotentialModel::ideal_gas() { return reference(0.0, 0.0); }

PairPotentialModel PairPotentialModel::tabulated(std::optional<LinearTable> j_table, std::optional<LinearTable> v_table,
                                                 double hardcore_radius, double j0) {
  if (!(hardcore_radius >= 0.0)) throw std::invalid_argument("hard-core radius must be >= 0");
  if (j_table && j_table->periodic()) throw std::invalid_argument("J table must be radial");
  if (v_table && !v_table->periodic()) throw std::invalid_argument("V table must be periodic");
  PairPotentialModel m;
  m.kind_ = ModelKind::custom_table;
  m.j0_ = j0;
  m.hardcore_ = hardcore_radius;
  m.j_table_ = std::move(j_table);
  m.v_table_ = std::move(v_table);
  if (m.v_table_) {
    const auto& xs = m.v_table_->knots();
    for (double x : xs) {
      if (std::abs(m.V(x) - m.V(kTwoPi - x)) > 1e-12) throw std::invalid_argument("V table is not symmetric: V(s) != V(-s)");
    }
  }
  m.finalize();
  return m;
}

PairPotentialModel PairPotentialModel::from_keyvalue(const KeyValueFile& kv) {
  const std::string kind = kv.get_string("model.kind", "xy");
  const double j0 = kv.get_double("model.j0", 1.0);
  const double hc = kv.get_double("model.hardcore_radius", 0.2);
  PairPotentialModel m;
  if (kind == "xy") {
    m = reference(j0, hc);
  } else if (kind == "custom-table") {
    std::optional<LinearTable> jt, vt;
    if (const auto p = kv.get_path("model.j_table")) jt = LinearTable::read_csv(*p, false);
    if (const auto p = kv.get_path("model.v_table")) vt = LinearTable::read_csv(*p, true);
    m = tabulated(std::move(jt), std::move(vt), hc, j0);
  } else {
    throw std::runtime_error("model.kind must be xy or custom-table, got " + kind);
  }
  if (kv.has("model.superstability_a") || kv.has("model.superstability_b"))
    m.set_superstability(kv.get_double("model.superstability_a", m.A_), kv.get_double("model.superstability_b", m.B_));
  return m;
}

PairPotentialModel PairPotentialModel::load(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::load(path));
}

std::string PairPotentialModel::name() const {
  std::ostringstream out;
  if (kind_ == ModelKind::xy) {
    out << "xy(j0=" << j0_ << ", hardcore=" << hardcore_ << ")";
  } else {
    out << "custom-table(" << (j_table_ ? "J table" : "gaussian J") << ", " << (v_table_ ? "V table" : "-cos V")
        << ", hardcore=" << hardcore_ << ")";
  }
  return out.str();
}

PeriodicFunction PairPotentialModel::V_function() const {
  PeriodicFunction f;
  if (v_table_) {
    const LinearTable table = *v_table_;
    f.eval = [table](double a) { return table(a); };
    for (double x : table.knots()) f.breakpoints.push_back(std::fmod(x, kTwoPi));
  } else {
    f.eval = [](double a) { return -std::cos(a); };
  }
  f.sup_abs = sup_abs_V_;
  return f;
}

double PairPotentialModel::psi(double r) const {
  if (!j_table_) {
    const double a = std::abs(j0_);
    return a * (1.0 + r * r) * std::exp(-r * r);
  }
  const auto it = std::upper_bound(psi_knots_.begin(), psi_knots_.end(), r);
  if (it == psi_knots_.end()) return 0.0;
  return psi_steps_[static_cast<std::size_t>(it - psi_knots_.begin())];
}

double PairPotentialModel::tail_constant(double R) const {
  if (R < 0.0) throw std::invalid_argument("tail radius must be >= 0");
  if (!j_table_) {
    if (j0_ == 0.0) return 0.0;
    const double a = std::abs(j0_);
    return integrate_upper_to_infinity([a](double r) { return 8.0 * r * a * std::exp(-r * r); }, R);
  }
  const auto& xs = j_table_->knots();
  const auto& ys = j_table_->values();
  auto absJ = [this](double r) { return std::abs(J_radial(r)); };
  double total = 0.0;
  auto add_piece = [&](double a, double b) {
    a = std::max(a, R);
    if (!(b > a)) return;
    total += integrate_upper([&](double r) { return 8.0 * r * absJ(r); }, a, b);
  };
  add_piece(0.0, xs.front());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    // Split at a sign change so |J| is linear on each piece.
    if (ys[i] * ys[i + 1] < 0.0) {
      const double root = xs[i] + (xs[i + 1] - xs[i]) * ys[i] / (ys[i] - ys[i + 1]);
      add_piece(xs[i], root);
      add_piece(root, xs[i + 1]);
    } else {
      add_piece(xs[i], xs[i + 1]);
    }
  }
  return total;
}

double PairPotentialModel::lower_reg_Psi(std::int64_t k) const {
  if (k < 0) throw std::invalid_argument("cell distance must be >= 0");
  return sup_abs_V_ * psi(static_cast<double>(std::max<std::int64_t>(0, k - 1)));
}

void PairPotentialModel::set_superstability(double A, double B) {
  if (!(A >= 0.0) || !(B >= 0.0)) throw std::invalid_argument("superstability constants must be nonnegative");
  A_ = A;
  B_ = B;
}

void PairPotentialModel::finalize() {
  // V
  if (v_table_) {
    sup_abs_V_ = 0.0;
    for (double y : v_table_->values()) sup_abs_V_ = std::max(sup_abs_V_, std::abs(y));
  } else {
    sup_abs_V_ = 1.0;
  }

  // J, psi, cutoff
  if (!j_table_) {
    sup_abs_J_ = std::abs(j0_);
    has_negative_J_ = j0_ < 0.0;
    const double a = sup_abs_J_;
    psi_s_ = a == 0.0 ? 0.0
                      : integrate_upper_to_infinity([a](double r) { return a * (1.0 + r * r) * std::exp(-r * r) * r; }, 0.0);
    const double bulk =
        a == 0.0 ? 0.0
                 : integrate_upper_to_infinity([a](double r) { return 8.0 * r * a * std::exp(-r * r) * (1.0 + r * r); }, 0.0);
    c_J_ = 1.0 + psi(0.0) + bulk;
    const double scale = a * sup_abs_V_;
    cutoff_ = scale > kNegligiblePair ? std::sqrt(std::log(scale / kNegligiblePair)) : 0.0;
    cutoff_ = std::max(cutoff_, hardcore_);
    dropped_bound_ = scale * std::exp(-cutoff_ * cutoff_);
  } else {
    const auto& xs = j_table_->knots();
    const auto& ys = j_table_->values();
    sup_abs_J_ = 0.0;
    has_negative_J_ = false;
    for (double y : ys) {
      sup_abs_J_ = std::max(sup_abs_J_, std::abs(y));
      has_negative_J_ = has_negative_J_ || y < 0.0;
    }
    // Segment bounds: on [0, x0] J is constant y0; on [x_i, x_{i+1}] |J| is at
    // most the larger endpoint and 1 + r^2 at most its right-end value.
    psi_knots_.clear();
    std::vector<double> bounds;
    psi_knots_.push_back(xs.front());
    bounds.push_back(std::abs(ys.front()) * (1.0 + xs.front() * xs.front()));
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      psi_knots_.push_back(xs[i + 1]);
      bounds.push_back(std::max(std::abs(ys[i]), std::abs(ys[i + 1])) * (1.0 + xs[i + 1] * xs[i + 1]));
    }
    psi_steps_.assign(bounds.size(), 0.0);
    double running = 0.0;
    for (std::size_t k = bounds.size(); k-- > 0;) {
      running = std::max(running, bounds[k]);
      psi_steps_[k] = running;
    }
    // The first knot can be 0, making the first step empty.
    psi_s_ = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < psi_knots_.size(); ++k) {
      psi_s_ += psi_steps_[k] * (psi_knots_[k] * psi_knots_[k] - prev * prev) / 2.0;
      prev = psi_knots_[k];
    }
    double bulk = 0.0;
    auto add_piece = [&](double a, double b) {
      bulk += integrate_upper([this](double r) { return 8.0 * r * std::abs(J_radial(r)) * (1.0 + r * r); }, a, b);
    };
    add_piece(0.0, xs.front());
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (ys[i] * ys[i + 1] < 0.0) {
        const double root = xs[i] + (xs[i + 1] - xs[i]) * ys[i] / (ys[i] - ys[i + 1]);
        add_piece(xs[i], root);
        add_piece(root, xs[i + 1]);
      } else {
        add_piece(xs[i], xs[i + 1]);
      }
    }
    c_J_ = 1.0 + psi(0.0) + bulk;
    // Smallest knot beyond which every |J| value stays negligible.
    std::size_t k = xs.size();
    double suffix = 0.0;
    while (k > 0 && std::max(suffix, std::abs(ys[k - 1])) * sup_abs_V_ < kNegligiblePair) {
      suffix = std::max(suffix, std::abs(ys[k - 1]));
      --k;
    }
    cutoff_ = k == 0 ? 0.0 : xs[k - 1];
    if (k < xs.size()) cutoff_ = xs[k];
    dropped_bound_ = suffix * sup_abs_V_;
    cutoff_ = std::max(cutoff_, hardcore_);
  }

  // Superstability defaults. With a hard core of radius r_hc, a unit cell
  // holds at most ceil(1/r_hc)^2 particles and every particle has at most
  // 8m neighbours in the m-th sup-norm shell of width r_hc, so
  // H >= -(S/2) N with S = |V| sum_m 8m psi(r_hc (m - 1)).
  if (hardcore_ > 0.0) {
    const double per_axis = std::ceil(1.0 / hardcore_ - 1e-12);
    const double max_per_cell = per_axis * per_axis;
    double S = 0.0;
    for (int m = 1;; ++m) {
      const double p = psi(hardcore_ * (m - 1));
      const double term = 8.0 * m * p;
      S += term;
      if (p == 0.0 || (hardcore_ * (m - 1) > 10.0 && term < 1e-16 * S) || m > 10000000) break;
    }
    S *= sup_abs_V_;
    neighbour_bound_ = S;
    A_ = 1.0;
    B_ = A_ * max_per_cell + S / 2.0;
  } else {
    // Without a hard core cell counts are unbounded and no A > 0 can work;
    // constants must then come from the model file.
    A_ = 0.0;
    B_ = 0.0;
    neighbour_bound_ = sup_abs_J_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
}

ExtendedEnergy pair_energy(const PairPotentialModel& model, const MarkedParticle& a, const MarkedParticle& b) {
  const Point d = a.position - b.position;
  if (d.x == 0.0 && d.y == 0.0) throw std::invalid_argument("pair_energy: coincident positions");
  const double r = norm(d);
  if (r < model.hardcore_radius()) return ExtendedEnergy::infinity();
  const double j = model.J_radial(r);
  if (j == 0.0) return 0.0;
  return j * model.V(spin_gap(a.spin, b.spin));
}

ExtendedEnergy energy(const PairPotentialModel& model, const Configuration& cfg) {
  ExtendedEnergy total;
  for (std::size_t i = 0; i < cfg.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j) total += pair_energy(model, cfg[i], cfg[j]);
  return total;
}

ExtendedEnergy interaction(const PairPotentialModel& model, const Configuration& a, const Configuration& b) {
  ExtendedEnergy total;
  for (const auto& y1 : a)
    for (const auto& y2 : b) total += pair_energy(model, y1, y2);
  return total;
}

ExtendedEnergy hamiltonian(const PairPotentialModel& model, const Window& window, const Configuration& inside,
                           const Configuration& boundary) {
  for (const auto& p : inside)
    if (!window.contains(p.position)) throw std::invalid_argument("hamiltonian: interior particle outside window");
  for (const auto& p : boundary)
    if (window.contains(p.position)) throw std::invalid_argument("hamiltonian: boundary particle inside window");
  return energy(model, inside) + interaction(model, inside, boundary);
}

namespace {

std::map<CellIndex, std::size_t> cell_counts(const Configuration& cfg) {
  std::map<CellIndex, std::size_t> counts;
  for (const auto& p : cfg) ++counts[cell_index(p.position)];
  return counts;
}

std::int64_t cell_distance(const CellIndex& a, const CellIndex& b) {
  return std::max(std::abs(a.rx - b.rx), std::abs(a.ry - b.ry));
}

}  // namespace

double superstability_margin(const PairPotentialModel& model, const Configuration& cfg) {
  const ExtendedEnergy h = energy(model, cfg);
  if (h.is_infinite()) return std::numeric_limits<double>::infinity();
  double bound = 0.0;
  for (const auto& [cell, n] : cell_counts(cfg)) {
    const double k = static_cast<double>(n);
    bound += model.superstability_A() * k * k - model.superstability_B() * k;
  }
  return h.value() - bound;
}

double lower_regularity_margin(const PairPotentialModel& model, const Configuration& a, const Configuration& b) {
  const ExtendedEnergy w = interaction(model, a, b);
  if (w.is_infinite()) return std::numeric_limits<double>::infinity();
  const auto ca = cell_counts(a);
  const auto cb = cell_counts(b);
  double bound = 0.0;
  for (const auto& [r, nr] : ca)
    for (const auto& [s, ns] : cb) {
      const double x = static_cast<double>(nr);
      const double y = static_cast<double>(ns);
      bound += model.lower_reg_Psi(cell_distance(r, s)) * (0.5 * x * x + 0.5 * y * y);
    }
  return w.value() + bound;
}

}  // namespace gibbsym
