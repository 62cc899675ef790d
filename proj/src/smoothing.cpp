#include "gibbsym/smoothing.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <deque>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gibbsym {

namespace {

// The unit bump g(s) = exp(-1/(1 - s^2)) and its derivatives.
double bump(double s) {
  const double u = 1.0 - s * s;
  return u > 0.0 ? std::exp(-1.0 / u) : 0.0;
}

double bump_first(double s) {
  const double u = 1.0 - s * s;
  if (u <= 0.0) return 0.0;
  return -2.0 * s * std::exp(-1.0 / u) / (u * u);
}

double bump_second(double s) {
  const double u = 1.0 - s * s;
  if (u <= 0.0) return 0.0;
  const double g = std::exp(-1.0 / u);
  const double u2 = u * u;
  const double s2 = s * s;
  return -2.0 * g * (1.0 / u2 + 4.0 * s2 / (u2 * u) - 2.0 * s2 / (u2 * u2));
}

double bump_integral() {
  static const double value = [] {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(bump, -1.0, 1.0, 1e-15);
  }();
  return value;
}

double bump_second_sup() {
  static const double value = [] {
    constexpr int kGrid = 1 << 16;
    double best = 0.0, arg = 0.0;
    for (int i = 1; i < kGrid; ++i) {
      const double s = -1.0 + 2.0 * i / kGrid;
      const double a = std::abs(bump_second(s));
      if (a > best) {
        best = a;
        arg = s;
      }
    }
    const double step = 2.0 / kGrid;
    const auto r = boost::math::tools::brent_find_minima([](double s) { return -std::abs(bump_second(s)); },
                                                         std::max(-1.0, arg - step), std::min(1.0, arg + step), 60);
    return std::max(best, -r.second);
  }();
  return value;
}

constexpr int kSimpsonIntervals = 1024;

// Integral over [-delta, delta] of w(t) V(sigma + t), composite Simpson on
// pieces cut at the kinks of V(sigma + .).
template <typename Weight>
double convolve(const PeriodicFunction& V, double delta, Weight w, double sigma) {
  std::vector<double> cuts{-delta, delta};
  for (double b : V.breakpoints) {
    double t = std::remainder(b - sigma, kTwoPi);
    if (t > -delta && t < delta) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p], b = cuts[p + 1];
    if (!(b > a)) continue;
    int n = static_cast<int>(std::ceil(kSimpsonIntervals * (b - a) / (2.0 * delta)));
    n = std::max(2, n + (n & 1));
    const double h = (b - a) / n;
    double sum = w(a) * V(sigma + a) + w(b) * V(sigma + b);
    for (int i = 1; i < n; ++i) {
      const double t = a + i * h;
      sum += (i % 2 == 1 ? 4.0 : 2.0) * w(t) * V(sigma + t);
    }
    total += sum * h / 3.0;
  }
  return total;
}

// Max minus min of V over every window [p, p + width] of the sorted periodic
// sample set, using monotone deques on the doubled sequence.
double max_oscillation(const std::vector<double>& pts, const std::vector<double>& vals, double width) {
  const std::size_t n = pts.size();
  auto pos = [&](std::size_t k) { return pts[k % n] + (k >= n ? kTwoPi : 0.0); };
  auto val = [&](std::size_t k) { return vals[k % n]; };
  std::deque<std::size_t> maxq, minq;
  double worst = 0.0;
  std::size_t right = 0;
  for (std::size_t left = 0; left < n; ++left) {
    while (right < 2 * n && pos(right) <= pos(left) + width) {
      while (!maxq.empty() && val(maxq.back()) <= val(right)) maxq.pop_back();
      maxq.push_back(right);
      while (!minq.empty() && val(minq.back()) >= val(right)) minq.pop_back();
      minq.push_back(right);
      ++right;
    }
    while (!maxq.empty() && maxq.front() < left) maxq.pop_front();
    while (!minq.empty() && minq.front() < left) minq.pop_front();
    if (!maxq.empty()) worst = std::max(worst, val(maxq.front()) - val(minq.front()));
  }
  return worst;
}

struct SampleSet {
  std::vector<double> pts;
  std::vector<double> vals;
  double lipschitz = 0.0;
  double spacing = 0.0;
};

SampleSet sample(const PeriodicFunction& V, std::size_t grid) {
  SampleSet s;
  for (std::size_t i = 0; i < grid; ++i) s.pts.push_back(kTwoPi * static_cast<double>(i) / static_cast<double>(grid));
  for (double b : V.breakpoints) {
    double t = std::fmod(b, kTwoPi);
    if (t < 0) t += kTwoPi;
    s.pts.push_back(t);
  }
  std::sort(s.pts.begin(), s.pts.end());
  s.pts.erase(std::unique(s.pts.begin(), s.pts.end()), s.pts.end());
  for (double p : s.pts) s.vals.push_back(V(p));
  s.spacing = kTwoPi / static_cast<double>(grid);
  const std::size_t n = s.pts.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = (k + 1) % n;
    const double gap = j == 0 ? s.pts[0] + kTwoPi - s.pts[k] : s.pts[j] - s.pts[k];
    if (gap > 0) s.lipschitz = std::max(s.lipschitz, std::abs(s.vals[j] - s.vals[k]) / gap);
  }
  return s;
}

// Oscillation over windows of width 2 delta, padded by one grid step on each
// side and by the sampled slope times the grid step for values between samples.
bool modulus_holds(const SampleSet& s, double delta, double epsilon, bool piecewise_linear) {
  const double width = 2.0 * delta + 2.0 * s.spacing;
  double osc = max_oscillation(s.pts, s.vals, width);
  if (!piecewise_linear) osc += s.lipschitz * s.spacing;
  return osc <= (1.0 - 1e-3) * epsilon / 2.0;
}

}  // namespace

double SmoothingKernel::operator()(double t) const { return normalizer * bump(t / delta); }

double SmoothingKernel::first_derivative(double t) const { return normalizer * bump_first(t / delta) / delta; }

double SmoothingKernel::second_derivative(double t) const {
  return normalizer * bump_second(t / delta) / (delta * delta);
}

SmoothingKernel mollifier(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("mollifier width must be positive");
  SmoothingKernel k;
  k.delta = delta;
  k.normalizer = 1.0 / (delta * bump_integral());
  k.second_derivative_sup = k.normalizer * bump_second_sup() / (delta * delta);
  return k;
}

double continuity_modulus(const PeriodicFunction& V, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  constexpr double kCap = std::numbers::pi / 4.0;
  // A function given only by its kinks (a table) is linear between samples.
  const bool piecewise_linear = !V.breakpoints.empty();
  const SampleSet coarse = sample(V, 1 << 16);
  if (modulus_holds(coarse, kCap, epsilon, piecewise_linear)) return kCap;

  double lo = kCap / 2.0;
  while (!modulus_holds(coarse, lo, epsilon, piecewise_linear)) {
    lo /= 2.0;
    if (lo < 1e-9) throw std::runtime_error("continuity modulus: V oscillates too fast to certify");
  }
  double hi = 2.0 * lo;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (modulus_holds(coarse, mid, epsilon, piecewise_linear) ? lo : hi) = mid;
  }
  const SampleSet fine = sample(V, 1 << 19);
  while (!modulus_holds(fine, lo, epsilon, piecewise_linear)) lo *= 0.99;
  return lo;
}

double mollified(const PeriodicFunction& V, const SmoothingKernel& kernel, double sigma) {
  return convolve(V, kernel.delta, [&](double t) { return kernel(t); }, sigma);
}

double mollified_second(const PeriodicFunction& V, const SmoothingKernel& kernel, double sigma) {
  return convolve(V, kernel.delta, [&](double t) { return kernel.second_derivative(t); }, sigma);
}

SmoothDecomposition::SmoothDecomposition(PeriodicFunction V, double epsilon, double delta, Branch branch)
    : V_(std::move(V)), epsilon_(epsilon), kernel_(mollifier(delta)), branch_(branch) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  const double shift = branch == Branch::plus ? epsilon / 2.0 : -epsilon / 2.0;
  std::vector<double> values(kSplineNodes);
  for (std::size_t i = 0; i < kSplineNodes; ++i) {
    const double s = kTwoPi * static_cast<double>(i) / static_cast<double>(kSplineNodes);
    values[i] = 0.5 * (mollified(V_, kernel_, s) + mollified(V_, kernel_, -s)) + shift;
  }
  spline_ = PeriodicCubicSpline(std::move(values));
  Vbar_second_sup_ = second_derivative_sup(*this);
}

double second_derivative_sup(const SmoothDecomposition& decomp) {
  const auto& V = decomp.V_function();
  const auto& k = decomp.kernel();
  const std::size_t n = SmoothDecomposition::kSplineNodes;
  std::vector<double> analytic(n);
  double analytic_sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    analytic[i] = mollified_second(V, k, s);
    analytic_sup = std::max(analytic_sup, std::abs(analytic[i]));
  }
  // Richardson-extrapolated central differences of the exact convolution at a subset of the grid.
  const double h = k.delta / 64.0;
  const auto central = [&](double s, double step) {
    return (mollified(V, k, s + step) - 2.0 * mollified(V, k, s) + mollified(V, k, s - step)) / (step * step);
  };
  const double scale = std::max(analytic_sup, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; i += 16) {
    const double s = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    const double fd = (4.0 * central(s, h / 2.0) - central(s, h)) / 3.0;
    worst = std::max(worst, std::abs(fd - analytic[i]));
  }
  if (worst > 1e-4 * scale) {
    std::ostringstream msg;
    msg << "second derivative check failed: finite differences differ from the analytic convolution by " << worst
        << " (sup " << analytic_sup << ")";
    throw std::runtime_error(msg.str());
  }
  const double spline_sup = decomp.spline().second_derivative_sup();
  return std::max(spline_sup, analytic_sup) * (1.0 + 1e-9);
}

DecompositionReport inspect(const SmoothDecomposition& decomp, std::size_t points, double offset) {
  DecompositionReport r;
  r.min_v = std::numeric_limits<double>::infinity();
  r.max_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double s = offset + kTwoPi * static_cast<double>(i) / static_cast<double>(points);
    const double vbar = decomp.Vbar(s);
    const double v = decomp.v(s);
    const double V = decomp.V(s);
    const double rebuilt = decomp.branch() == Branch::plus ? vbar - v : vbar + v;
    r.max_reconstruction_error = std::max(r.max_reconstruction_error, std::abs(rebuilt - V));
    r.min_v = std::min(r.min_v, v);
    r.max_v = std::max(r.max_v, v);
    r.max_asymmetry = std::max(r.max_asymmetry, std::abs(vbar - decomp.Vbar(-s)));
  }
  return r;
}

namespace {

void validate(const SmoothDecomposition& d) {
  const double half = kTwoPi / (2.0 * SmoothDecomposition::kSplineNodes);
  for (double offset : {0.0, half}) {
    const DecompositionReport r = inspect(d, SmoothDecomposition::kSplineNodes, offset);
    if (!(r.min_v > 0.0) || !(r.max_v < d.epsilon()) || r.max_reconstruction_error > 1e-10) {
      std::ostringstream msg;
      msg << "smooth decomposition invariant failed: v in [" << r.min_v << ", " << r.max_v << "], epsilon "
          << d.epsilon() << ", reconstruction error " << r.max_reconstruction_error;
      throw std::runtime_error(msg.str());
    }
  }
  if (d.Vbar_second_sup() > d.second_derivative_bound() + 1e-8) {
    std::ostringstream msg;
    msg << "smooth decomposition: |Vbar''| = " << d.Vbar_second_sup() << " exceeds 2 delta |f''| |V| = "
        << d.second_derivative_bound();
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

SmoothDecomposition smooth_decompose(const PeriodicFunction& V, double epsilon) {
  const double delta = continuity_modulus(V, epsilon);
  SmoothDecomposition d(V, epsilon, delta, Branch::plus);
  validate(d);
  return d;
}

SignSplitDecomposition sign_split_decompose(const PeriodicFunction& V, double epsilon) {
  const double delta = continuity_modulus(V, epsilon);
  SignSplitDecomposition out{SmoothDecomposition(V, epsilon, delta, Branch::plus),
                             SmoothDecomposition(V, epsilon, delta, Branch::minus)};
  validate(out.plus);
  validate(out.minus);
  return out;
}

ExtendedEnergy smooth_pair_energy(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                  const MarkedParticle& a, const MarkedParticle& b) {
  const Point d = a.position - b.position;
  if (d.x == 0.0 && d.y == 0.0) throw std::invalid_argument("smooth_pair_energy: coincident positions");
  const double r = norm(d);
  if (r < model.hardcore_radius()) return ExtendedEnergy::infinity();
  const double j = model.J_radial(r);
  if (j == 0.0) return 0.0;
  return j * split.for_coupling(j).Vbar(spin_gap(a.spin, b.spin));
}

}  // namespace gibbsym
