#include "gibbsym/deformation.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gibbsym {

double q(double s) { return s <= 2.0 ? 1.0 : 1.0 / (s * std::log(s)); }

double Q(double k) {
  if (!(k >= 0.0)) throw std::invalid_argument("Q: argument must be nonnegative");
  if (k <= 2.0) return k;
  return 2.0 + std::log(std::log(k)) - std::log(std::log(2.0));
}

double taper(double s, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("taper: outer radius must be positive");
  if (s <= 0.0) return 1.0;
  if (s >= k) return 0.0;
  const double qk = Q(k);
  return (qk - Q(s)) / qk;
}

void TaperParams::validate() const {
  if (!(tau > 0.0 && tau < std::numbers::pi)) throw std::invalid_argument("taper: tau must lie in (0, pi)");
  if (n_prime < 1) throw std::invalid_argument("taper: n_prime must be at least 1");
  if (R <= n_prime) throw std::invalid_argument("taper: R must exceed n_prime");
  if (n <= R) throw std::invalid_argument("taper: n must exceed R");
}

double tau_n(Point x, const TaperParams& params) {
  return params.tau * taper(norm(x) - params.R, static_cast<double>(params.n - params.R));
}

DeformationField cluster_taper(const Configuration& cfg, const ClusterDecomposition& clusters,
                               const TaperParams& params) {
  if (clusters.label.size() != cfg.size()) throw std::invalid_argument("cluster decomposition does not match configuration");
  DeformationField out;
  out.angle.resize(cfg.size());
  out.witness.resize(cfg.size());
  for (const auto& members : clusters.members) {
    std::size_t best = members.front();
    for (std::size_t m : members) {
      const double a = norm(cfg[m].position), b = norm(cfg[best].position);
      if (a > b || (a == b && m < best)) best = m;
    }
    const double value = tau_n(cfg[best].position, params);
    for (std::size_t m : members) {
      out.angle[m] = value;
      out.witness[m] = norm(cfg[m].position) >= params.n ? m : best;
    }
  }
  return out;
}

double dirichlet_energy(const Configuration& cfg, const PairPotentialModel& model, const BondSet& pairs,
                        const DeformationField& field) {
  if (field.angle.size() != cfg.size()) throw std::invalid_argument("field does not match configuration");
  double f = 0.0;
  for (const Bond& b : pairs.bonds) {
    const double d = field.angle[b.i] - field.angle[b.j];
    if (d == 0.0) continue;
    f += std::abs(model.J(cfg[b.i].position - cfg[b.j].position)) * d * d;
  }
  return f;
}

double vbar_second_bound(const SignSplitDecomposition& split) {
  return std::max(split.plus.Vbar_second_sup(), split.minus.Vbar_second_sup());
}

GoodSetVerdict good_set_verdict(const Configuration& cfg, const PairPotentialModel& model,
                                const SignSplitDecomposition& split, const std::vector<Bond>& open,
                                const TaperParams& params) {
  params.validate();
  const ClusterDecomposition cl = clusters(cfg, open);
  const DeformationField field = cluster_taper(cfg, cl, params);
  GoodSetVerdict v;
  v.range = cluster_range(cfg, cl, Window(params.n_prime));
  v.energy = dirichlet_energy(cfg, model, bond_set(cfg, model, params.n), field);
  const double s = vbar_second_bound(split);
  v.threshold = s > 0.0 ? 2.0 / s : std::numeric_limits<double>::infinity();
  v.range_ok = v.range < params.R;
  v.energy_ok = v.energy < v.threshold;
  v.is_good = v.range_ok && v.energy_ok;
  return v;
}

Configuration apply_deformation(const Configuration& cfg, const DeformationField& field, int direction) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +1 or -1");
  if (field.angle.size() != cfg.size()) throw std::invalid_argument("field does not match configuration");
  std::vector<MarkedParticle> out(cfg.begin(), cfg.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Spin shift = Spin::from_angle(field.angle[i]);
    out[i].spin = direction > 0 ? out[i].spin + shift : out[i].spin - shift;
  }
  return Configuration(std::move(out));
}

TaylorMargin taylor_margin(const Configuration& cfg, const PairPotentialModel& model,
                           const SignSplitDecomposition& split, const BondSet& pairs, const DeformationField& field) {
  TaylorMargin out;
  const Configuration minus = apply_deformation(cfg, field, -1);
  const Configuration plus = apply_deformation(cfg, field, +1);
  for (const Bond& b : pairs.bonds) {
    const ExtendedEnergy h = smooth_pair_energy(model, split, cfg[b.i], cfg[b.j]);
    if (h.is_infinite()) {
      out.finite = false;
      out.margin = 0.0;
      return out;
    }
    out.delta_minus += smooth_pair_energy(model, split, minus[b.i], minus[b.j]).value() - h.value();
    out.delta_plus += smooth_pair_energy(model, split, plus[b.i], plus[b.j]).value() - h.value();
  }
  out.second_difference = out.delta_minus + out.delta_plus;
  out.bound = vbar_second_bound(split) * dirichlet_energy(cfg, model, pairs, field);
  out.margin = 0.5 * std::numbers::e * (std::exp(-out.delta_minus) + std::exp(-out.delta_plus)) - 1.0;
  return out;
}

double taper_square_integral(int R, int n) {
  if (R < 0 || n <= 0) throw std::invalid_argument("taper_square_integral: bad radii");
  // By symmetry, eight copies of the triangle 0 <= y <= x < n where |x| = x.
  // The integrand jumps on the ring |x| = R + 2, so the outer variable is split there.
  using boost::math::quadrature::gauss;
  auto g = [R](double r) {
    const double v = q(r - R);
    return v * v;
  };
  double edges[3] = {0.0, std::min<double>(R + 2, n), static_cast<double>(n)};
  double total = 0.0;
  for (int piece = 0; piece < 2; ++piece) {
    const double a = edges[piece], b = edges[piece + 1];
    if (b <= a) continue;
    const int sub = 16;
    for (int s = 0; s < sub; ++s) {
      const double lo = a + (b - a) * s / sub, hi = a + (b - a) * (s + 1) / sub;
      total += gauss<double, 20>::integrate(
          [&](double x) { return gauss<double, 20>::integrate([&](double) { return g(x); }, 0.0, x); }, lo, hi);
    }
  }
  return 8.0 * total;
}

double taper_square_bound(int R, int n) {
  return 8.0 * (R + 3.0) * (R + 3.0) + 8.0 * R * Q(static_cast<double>(n - R));
}

}  // namespace gibbsym
