#include "gibbsym/bonds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gibbsym/rng.hpp"
#include "gibbsym/union_find.hpp"

namespace gibbsym {

Bond make_bond(std::size_t a, std::size_t b) {
  if (a == b) throw std::invalid_argument("a bond joins two distinct particles");
  return a < b ? Bond{a, b} : Bond{b, a};
}

BondSet bond_set(const Configuration& cfg, const PairPotentialModel& model, double n) {
  BondSet out;
  out.window_half_width = n;
  if (!model.interacting() || cfg.size() < 2) return out;
  const Window window(n);
  const double c = model.interaction_cutoff();
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> buckets;
  auto key = [c](Point p) {
    return std::make_pair(static_cast<std::int64_t>(std::floor(p.x / c)), static_cast<std::int64_t>(std::floor(p.y / c)));
  };
  for (std::size_t i = 0; i < cfg.size(); ++i) buckets[key(cfg[i].position)].push_back(i);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const Point p = cfg[i].position;
    const bool inside_i = window.contains(p);
    const auto [kx, ky] = key(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find({kx + dx, ky + dy});
        if (it == buckets.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i) continue;
          const Point q = cfg[j].position;
          if (!inside_i && !window.contains(q)) continue;
          const double r = distance(p, q);
          if (r >= c || model.J_radial(r) == 0.0) continue;
          out.bonds.push_back({i, j});
        }
      }
  }
  std::sort(out.bonds.begin(), out.bonds.end());
  return out;
}

double conditional_bond_probability(const PairPotentialModel& model, const SmoothDecomposition& decomp,
                                    const MarkedParticle& y1, const MarkedParticle& y2) {
  const double j = model.J(y1.position - y2.position);
  if (j == 0.0) return 0.0;
  if (j < 0.0 && decomp.branch() == Branch::plus)
    throw std::invalid_argument("negative coupling needs the minus decomposition");
  if (j > 0.0 && decomp.branch() == Branch::minus)
    throw std::invalid_argument("positive coupling needs the plus decomposition");
  const double w = std::abs(j) * decomp.v(spin_gap(y1.spin, y2.spin));
  return -std::expm1(-w);
}

double conditional_bond_probability(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                    const MarkedParticle& y1, const MarkedParticle& y2) {
  return conditional_bond_probability(model, split.for_coupling(model.J(y1.position - y2.position)), y1, y2);
}

double expansion_identity_check(std::span<const double> weights) {
  const std::size_t m = weights.size();
  if (m > 20) throw std::invalid_argument("expansion identity check supports at most 20 bonds");
  std::vector<double> factor(m);
  double product = 1.0;
  for (std::size_t e = 0; e < m; ++e) {
    factor[e] = std::expm1(weights[e]);
    product *= std::exp(weights[e]);
  }
  double sum = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double term = 1.0;
    for (std::size_t e = 0; e < m; ++e)
      if (mask & (1u << e)) term *= factor[e];
    sum += term;
  }
  return std::abs(sum - product) / std::abs(product);
}

BondSet BondSample::present_set() const {
  BondSet out;
  out.window_half_width = window_half_width;
  for (std::size_t k = 0; k < bonds.size(); ++k)
    if (present[k]) out.bonds.push_back(bonds[k]);
  return out;
}

BondSample sample_bonds(const Configuration& cfg, const PairPotentialModel& model, const SignSplitDecomposition& split,
                        double n, std::uint64_t seed) {
  BondSample out;
  out.window_half_width = n;
  out.bonds = bond_set(cfg, model, n).bonds;
  Rng rng(seed);
  out.probability.reserve(out.bonds.size());
  out.present.reserve(out.bonds.size());
  for (const Bond& b : out.bonds) {
    const double p = conditional_bond_probability(model, split, cfg[b.i], cfg[b.j]);
    out.probability.push_back(p);
    out.present.push_back(rng.uniform() < p);
  }
  return out;
}

double bernoulli_probability(const PairPotentialModel& model, double epsilon, const MarkedParticle& y1,
                             const MarkedParticle& y2) {
  const double e = std::abs(model.J(y1.position - y2.position)) * epsilon;
  if (!(e >= 0.0) || e > 1.0) {
    std::ostringstream msg;
    msg << "Bernoulli bond probability " << e << " outside [0, 1]; epsilon too large for this coupling";
    throw std::domain_error(msg.str());
  }
  return e;
}

double holley_bracket(double eps_e, double w) { return eps_e + (eps_e - 1.0) * std::expm1(w); }

bool holley_single_bond_check(const PairPotentialModel& model, const SmoothDecomposition& decomp, double epsilon,
                              Point x1, Point x2, std::size_t spin_grid) {
  const double j = model.J(x1 - x2);
  const double eps_e = bernoulli_probability(model, epsilon, {x1, Spin{}}, {x2, Spin{}});
  for (std::size_t k = 0; k < spin_grid; ++k) {
    const double s = kTwoPi * static_cast<double>(k) / static_cast<double>(spin_grid);
    if (holley_bracket(eps_e, std::abs(j) * decomp.v(s)) < 0.0) return false;
  }
  return true;
}

DominationResult exhaustive_domination_check(std::span<const double> pi, std::span<const double> eps,
                                             double tolerance) {
  const std::size_t m = eps.size();
  if (m > 4) throw std::invalid_argument("exhaustive domination supports at most 4 bonds");
  const std::size_t subsets = std::size_t{1} << m;
  if (pi.size() != subsets) throw std::invalid_argument("pi must have one entry per subset");
  double total = 0.0;
  for (double p : pi) {
    if (p < -1e-15) throw std::invalid_argument("pi has negative mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("pi is not normalized");
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("Bernoulli probabilities must lie in [0, 1]");

  std::vector<double> bern(subsets);
  for (std::size_t s = 0; s < subsets; ++s) {
    double w = 1.0;
    for (std::size_t e = 0; e < m; ++e) w *= (s >> e) & 1u ? eps[e] : 1.0 - eps[e];
    bern[s] = w;
  }
  DominationResult out;
  out.min_slack = std::numeric_limits<double>::infinity();
  const std::uint64_t families = std::uint64_t{1} << subsets;
  for (std::uint64_t f = 0; f < families; ++f) {
    bool up = true;
    for (std::size_t s = 0; s < subsets && up; ++s) {
      if (!((f >> s) & 1u)) continue;
      for (std::size_t e = 0; e < m; ++e)
        if (!((f >> (s | (std::size_t{1} << e))) & 1u)) {
          up = false;
          break;
        }
    }
    if (!up) continue;
    ++out.upsets_checked;
    double a = 0.0, b = 0.0;
    for (std::size_t s = 0; s < subsets; ++s)
      if ((f >> s) & 1u) {
        a += pi[s];
        b += bern[s];
      }
    out.min_slack = std::min(out.min_slack, b - a);
  }
  out.ok = out.min_slack >= -tolerance;
  return out;
}

namespace {

// Energy terms of an interior configuration: pairs with at least one
// endpoint inside. Pairs in `bonds` use the smooth potential; the rest use
// U itself so that the bond expansion reproduces exp(-H) exactly.
struct SpinSums {
  double H = 0.0;         // H^U
  double Hbar = 0.0;      // H^Ubar on bonded pairs, H^U elsewhere
  bool infinite = false;
};

SpinSums spin_sums(const PairPotentialModel& model, const SignSplitDecomposition& split, const Configuration& cfg,
                   std::size_t interior, const std::vector<Bond>& bonds, std::vector<double>& w) {
  SpinSums out;
  w.assign(bonds.size(), 0.0);
  std::size_t next_bond = 0;
  for (std::size_t i = 0; i < interior; ++i)
    for (std::size_t j = i + 1; j < cfg.size(); ++j) {
      const ExtendedEnergy u = pair_energy(model, cfg[i], cfg[j]);
      if (u.is_infinite()) {
        out.infinite = true;
        return out;
      }
      out.H += u.value();
      const bool bonded = next_bond < bonds.size() && bonds[next_bond].i == i && bonds[next_bond].j == j;
      if (bonded) {
        const double jv = model.J(cfg[i].position - cfg[j].position);
        const double weight = std::abs(jv) * split.for_coupling(jv).v(spin_gap(cfg[i].spin, cfg[j].spin));
        w[next_bond] = weight;
        out.Hbar += smooth_pair_energy(model, split, cfg[i], cfg[j]).value();
        ++next_bond;
      } else {
        out.Hbar += u.value();
      }
    }
  return out;
}

}  // namespace

TinyBondLaw tiny_bond_law(const PairPotentialModel& model, const SignSplitDecomposition& split, double epsilon,
                          const Window& window, const std::vector<Point>& interior, const Configuration& boundary,
                          std::size_t spin_grid) {
  if (interior.size() > 3) throw std::invalid_argument("tiny systems have at most 3 interior particles");
  if (spin_grid == 0) throw std::invalid_argument("spin grid must be positive");
  std::vector<MarkedParticle> ps;
  for (Point p : interior) {
    if (!window.contains(p)) throw std::invalid_argument("interior particle outside the window");
    ps.push_back({p, Spin{}});
  }
  for (const auto& b : boundary) {
    if (window.contains(b.position)) throw std::invalid_argument("boundary particle inside the window");
    ps.push_back(b);
  }
  TinyBondLaw out;
  out.cfg = Configuration(ps);
  out.bonds = bond_set(out.cfg, model, window.half_width()).bonds;
  const std::size_t m = out.bonds.size();
  if (m > 4) throw std::invalid_argument("tiny system has more than 4 bonds");
  for (const Bond& b : out.bonds) out.eps.push_back(bernoulli_probability(model, epsilon, out.cfg[b.i], out.cfg[b.j]));

  const std::size_t k = interior.size();
  const std::size_t subsets = std::size_t{1} << m;
  std::vector<double> W(subsets, 0.0);
  std::size_t points = 1;
  for (std::size_t i = 0; i < k; ++i) points *= spin_grid;
  std::vector<double> w;
  std::vector<double> factor(m);
  for (std::size_t idx = 0; idx < points; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < k; ++i) {
      const double angle = kTwoPi * (static_cast<double>(rest % spin_grid) + 0.5) / static_cast<double>(spin_grid);
      rest /= spin_grid;
      ps[i].spin = Spin::from_angle(angle);
    }
    const Configuration cfg(ps);
    const SpinSums sums = spin_sums(model, split, cfg, k, out.bonds, w);
    if (sums.infinite) continue;
    const double base = std::exp(-sums.Hbar);
    for (std::size_t e = 0; e < m; ++e) factor[e] = std::expm1(w[e]);
    for (std::size_t s = 0; s < subsets; ++s) {
      double term = base;
      for (std::size_t e = 0; e < m; ++e)
        if ((s >> e) & 1u) term *= factor[e];
      W[s] += term;
    }
  }
  double total = 0.0;
  for (double x : W) total += x;
  out.pi.assign(subsets, 0.0);
  if (total > 0.0) {
    for (std::size_t s = 0; s < subsets; ++s) out.pi[s] = W[s] / total;
  } else {
    out.pi[0] = 1.0;
  }
  return out;
}

ClusterDecomposition clusters(const Configuration& cfg, const std::vector<Bond>& bonds) {
  const std::size_t n = cfg.size();
  UnionFind uf(n);
  for (const Bond& b : bonds) {
    if (b.i >= n || b.j >= n) throw std::out_of_range("bond references a missing particle");
    uf.unite(b.i, b.j);
  }
  ClusterDecomposition out;
  out.label.assign(n, 0);
  std::vector<std::size_t> root_label(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (root_label[r] == n) {
      root_label[r] = out.members.size();
      out.members.emplace_back();
      out.max_norm.push_back(0.0);
    }
    const std::size_t l = root_label[r];
    out.label[i] = l;
    out.members[l].push_back(i);
    out.max_norm[l] = std::max(out.max_norm[l], norm(cfg[i].position));
  }
  return out;
}

double cluster_range(const Configuration& cfg, const ClusterDecomposition& cl, const Window& window) {
  if (cl.label.size() != cfg.size()) throw std::invalid_argument("cluster decomposition does not match configuration");
  double out = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i)
    if (window.contains(cfg[i].position)) out = std::max(out, cl.max_norm[cl.label[i]]);
  return out;
}

ChainBound chain_bound(const Configuration& cfg, const PairPotentialModel& model, double epsilon, std::size_t x1,
                       std::size_t x2, std::size_t max_len) {
  const std::size_t n = cfg.size();
  if (x1 >= n || x2 >= n || x1 == x2) throw std::invalid_argument("chain_bound needs two distinct particles");
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  double j_max = 0.0, s_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = std::abs(model.J(cfg[i].position - cfg[j].position));
      if (a == 0.0) continue;
      adj[i].push_back({j, a});
      row += a;
      j_max = std::max(j_max, a);
    }
    s_max = std::max(s_max, row);
  }
  ChainBound out;
  std::vector<bool> used(n, false);
  used[x1] = true;
  // Depth-first enumeration of self-avoiding paths from x1 that end at x2.
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t at, std::size_t len, double weight) {
    for (const auto& [next, a] : adj[at]) {
      if (used[next]) continue;
      const double w = weight * epsilon * a;
      if (next == x2) {
        out.bound += w;
        continue;
      }
      if (len + 1 >= max_len) continue;
      used[next] = true;
      walk(next, len + 1, w);
      used[next] = false;
    }
  };
  if (max_len >= 1) walk(x1, 0, 1.0);
  out.exact = max_len + 1 >= n;
  if (!out.exact) {
    // Paths of length m: each intermediate step sums to at most s_max, the
    // last factor is at most j_max.
    for (std::size_t m = max_len + 1; m + 1 <= n; ++m)
      out.tail += std::pow(epsilon, static_cast<double>(m)) * std::pow(s_max, static_cast<double>(m - 1)) * j_max;
  }
  return out;
}

DecompositionCheck decomposition_identity_check(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                                const Window& window, const Configuration& boundary, double z,
                                                const std::vector<TinyEvent>& events, int kmax, int grid,
                                                int spin_grid) {
  if (kmax < 0 || kmax > 2) throw std::invalid_argument("decomposition check supports at most 2 interior particles");
  if (grid < 1 || spin_grid < 1) throw std::invalid_argument("grids must be nonempty");
  for (const auto& b : boundary)
    if (window.contains(b.position)) throw std::invalid_argument("boundary particle inside the window");
  const double mu = z * window.area();
  {
    double term = std::exp(-mu);
    for (int k = 0; k <= kmax; ++k) term *= mu / (k + 1);
    double tail = 0.0;
    for (int k = kmax + 1; k < kmax + 200 && term > 0.0; ++k) {
      tail += term;
      term *= mu / (k + 1);
    }
    if (tail > 1e-6) {
      std::ostringstream msg;
      msg << "decomposition check: Poisson mass beyond " << kmax << " particles is " << tail << " > 1e-6";
      throw std::runtime_error(msg.str());
    }
  }

  const double t = window.half_width();
  const double dx = 2.0 * t / grid;
  std::vector<Point> sites;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) sites.push_back({-t + (i + 0.5) * dx, -t + (j + 0.5) * dx});
  std::vector<Spin> spins;
  for (int k = 0; k < spin_grid; ++k) spins.push_back(Spin::from_angle(kTwoPi * (k + 0.5) / spin_grid));

  const std::size_t ne = events.size();
  std::vector<double> left(ne, 0.0), right(ne, 0.0);
  double Z = 0.0;

  auto accumulate = [&](const std::vector<Point>& positions, double position_weight) {
    const std::size_t k = positions.size();
    std::vector<MarkedParticle> ps;
    for (Point p : positions) ps.push_back({p, Spin{}});
    for (const auto& b : boundary) ps.push_back(b);
    const std::vector<Bond> bonds = bond_set(Configuration(ps), model, t).bonds;
    const std::size_t m = bonds.size();
    if (m > 16) throw std::runtime_error("decomposition check: too many bonds for subset enumeration");
    const std::size_t subsets = std::size_t{1} << m;
    std::size_t points = 1;
    for (std::size_t i = 0; i < k; ++i) points *= spins.size();
    const double spin_weight = std::pow(1.0 / static_cast<double>(spins.size()), static_cast<double>(k));

    double W_total = 0.0;                                   // W_n(X)
    std::vector<double> W_bond(subsets, 0.0);               // W_n(A, X)
    std::vector<std::vector<double>> W_event(ne, std::vector<double>(subsets, 0.0));
    std::vector<double> w, factor(m);
    for (std::size_t idx = 0; idx < points; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = 0; i < k; ++i) {
        ps[i].spin = spins[rest % spins.size()];
        rest /= spins.size();
      }
      const Configuration cfg(ps);
      const SpinSums sums = spin_sums(model, split, cfg, k, bonds, w);
      if (sums.infinite) continue;
      std::vector<MarkedParticle> in(ps.begin(), ps.begin() + static_cast<std::ptrdiff_t>(k));
      const Configuration interior(in);
      std::vector<bool> hit(ne);
      for (std::size_t e = 0; e < ne; ++e) hit[e] = events[e].holds(interior);
      // Left side: the Gibbs integrand itself.
      const double gibbs = spin_weight * std::exp(-sums.H);
      W_total += gibbs;
      for (std::size_t e = 0; e < ne; ++e)
        if (hit[e]) left[e] += position_weight * gibbs;
      // Right side ingredients: V_n(A, (X, sigma) Ybar) per bond subset.
      const double base = spin_weight * std::exp(-sums.Hbar);
      for (std::size_t b = 0; b < m; ++b) factor[b] = std::expm1(w[b]);
      for (std::size_t s = 0; s < subsets; ++s) {
        double term = base;
        for (std::size_t b = 0; b < m; ++b)
          if ((s >> b) & 1u) term *= factor[b];
        W_bond[s] += term;
        for (std::size_t e = 0; e < ne; ++e)
          if (hit[e]) W_event[e][s] += term;
      }
    }
    Z += position_weight * W_total;
    if (W_total <= 0.0) return;
    for (std::size_t e = 0; e < ne; ++e) {
      double mix = 0.0;
      for (std::size_t s = 0; s < subsets; ++s) {
        if (W_bond[s] <= 0.0) continue;
        const double pi = W_bond[s] / W_total;
        const double alpha = W_event[e][s] / W_bond[s];
        mix += pi * alpha;
      }
      right[e] += position_weight * W_total * mix;
    }
  };

  accumulate({}, 1.0);
  const double cell = z * dx * dx;
  if (kmax >= 1)
    for (Point a : sites) accumulate({a}, cell);
  if (kmax >= 2)
    for (std::size_t a = 0; a < sites.size(); ++a)
      for (std::size_t b = 0; b < sites.size(); ++b) {
        if (a == b) continue;
        accumulate({sites[a], sites[b]}, cell * cell / 2.0);
      }

  DecompositionCheck out;
  for (std::size_t e = 0; e < ne; ++e) {
    const double l = left[e] / Z;
    const double r = right[e] / Z;
    out.events.push_back({events[e].name, {l, r}});
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(l - r));
  }
  return out;
}

}  // namespace gibbsym
