#include "gibbsym/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gibbsym {

void SamplerParams::validate() const {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("activity z must be positive");
  const double probs[] = {mix.birth, mix.death, mix.translate, mix.rotate};
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("move probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("move probabilities must sum to 1");
  if ((mix.birth > 0.0) != (mix.death > 0.0)) throw std::invalid_argument("birth and death must both be enabled or both disabled");
  if (!(translate_scale >= 0.0) || !(rotate_scale >= 0.0)) throw std::invalid_argument("move scales must be nonnegative");
  if (!(burn_in_fraction >= 0.0) || !(burn_in_fraction < 1.0)) throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
  if (recompute_interval == 0) throw std::invalid_argument("recompute interval must be positive");
}

double birth_acceptance(double z, double area, std::size_t n_before, const MoveMix& mix, double dH) {
  if (std::isinf(dH) && dH > 0) return 0.0;
  const double ratio = z * area / static_cast<double>(n_before + 1) * (mix.death / mix.birth) * std::exp(-dH);
  return std::min(1.0, ratio);
}

double death_acceptance(double z, double area, std::size_t n_before, const MoveMix& mix, double dH) {
  if (n_before == 0) return 0.0;
  if (std::isinf(dH) && dH > 0) return 0.0;
  const double ratio = static_cast<double>(n_before) / (z * area) * (mix.birth / mix.death) * std::exp(-dH);
  return std::min(1.0, ratio);
}

double metropolis_acceptance(double dH) {
  if (std::isinf(dH) && dH > 0) return 0.0;
  return dH <= 0.0 ? 1.0 : std::exp(-dH);
}

Configuration sample_poisson(const Window& window, double z, Rng& rng, std::optional<Spin> fixed_spin) {
  if (!(z >= 0.0)) throw std::invalid_argument("activity must be >= 0");
  const auto n = rng.poisson(z * window.area());
  const double t = window.half_width();
  std::vector<MarkedParticle> ps;
  ps.reserve(n);
  std::set<std::pair<double, double>> seen;
  while (ps.size() < n) {
    Point p{rng.uniform(-t, t), rng.uniform(-t, t)};
    const Spin s = Spin::from_ticks(rng.next());
    if (!window.contains(p) || !seen.insert({p.x, p.y}).second) continue;
    ps.push_back({p, fixed_spin ? *fixed_spin : s});
  }
  return Configuration(std::move(ps));
}

Configuration sample_poisson(const Window& window, double z, std::uint64_t seed) {
  Rng rng(seed);
  return sample_poisson(window, z, rng);
}

Configuration hardcore_thin(const Configuration& cfg, double radius, const Configuration& fixed) {
  if (!(radius > 0.0)) return cfg;
  // Bucket kept points on a grid of spacing `radius`; conflicts lie in adjacent buckets.
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Point>> buckets;
  auto key = [radius](Point p) {
    return std::make_pair(static_cast<std::int64_t>(std::floor(p.x / radius)),
                          static_cast<std::int64_t>(std::floor(p.y / radius)));
  };
  auto conflicts = [&](Point p) {
    const auto [kx, ky] = key(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find({kx + dx, ky + dy});
        if (it == buckets.end()) continue;
        for (Point q : it->second)
          if (distance(p, q) < radius) return true;
      }
    return false;
  };
  for (const auto& p : fixed) buckets[key(p.position)].push_back(p.position);
  std::vector<MarkedParticle> kept;
  for (const auto& p : cfg) {
    if (conflicts(p.position)) continue;
    buckets[key(p.position)].push_back(p.position);
    kept.push_back(p);
  }
  return Configuration(std::move(kept));
}

GibbsChain::GibbsChain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
                       const Configuration& initial, const SamplerParams& params)
    : GibbsChain(model, window, boundary, initial, params, Rng(params.seed)) {}

GibbsChain::GibbsChain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
                       const Configuration& initial, const SamplerParams& params, Rng rng)
    : model_(&model), window_(window), boundary_(boundary), params_(params), rng_(rng) {
  params_.validate();
  for (const auto& p : boundary_)
    if (window_.contains(p.position)) throw std::invalid_argument("boundary particle inside the window");
  for (const auto& p : initial)
    if (!window_.contains(p.position)) throw std::invalid_argument("initial particle outside the window");

  cutoff_ = model.interaction_cutoff();
  interacting_ = cutoff_ > 0.0;
  const double t = window_.half_width();
  const double reach = t + cutoff_;
  origin_ = -reach;
  cell_size_ = std::max(cutoff_, 2.0 * reach / 128.0);
  cells_per_axis_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * reach / cell_size_)));
  cells_.assign(cells_per_axis_ * cells_per_axis_, {});
  if (interacting_) {
    for (const auto& b : boundary_) {
      const Point p = b.position;
      if (p.x < -reach || p.x >= reach || p.y < -reach || p.y >= reach) continue;
      const auto id = static_cast<std::int64_t>(boundary_near_.size());
      boundary_near_.push_back(b);
      cells_[cell_of(p)].push_back(-1 - id);
    }
  }
  for (const auto& p : initial) insert(p);
  steps_per_sweep_ = params_.steps_per_sweep != 0
                         ? params_.steps_per_sweep
                         : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(params_.z * window_.area())));
  recompute_energy();
  if (std::isinf(energy_)) throw std::invalid_argument("initial state has infinite energy");
}

std::size_t GibbsChain::cell_of(Point p) const {
  auto idx = [&](double c) {
    auto k = static_cast<std::int64_t>(std::floor((c - origin_) / cell_size_));
    return static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(cells_per_axis_) - 1));
  };
  return idx(p.y) * cells_per_axis_ + idx(p.x);
}

void GibbsChain::insert(const MarkedParticle& p) {
  const std::size_t c = cell_of(p.position);
  cells_[c].push_back(static_cast<std::int64_t>(particles_.size()));
  particles_.push_back(p);
  particle_cell_.push_back(c);
}

void GibbsChain::erase(std::size_t i) {
  auto& own = cells_[particle_cell_[i]];
  own.erase(std::find(own.begin(), own.end(), static_cast<std::int64_t>(i)));
  const std::size_t last = particles_.size() - 1;
  if (i != last) {
    auto& moved = cells_[particle_cell_[last]];
    *std::find(moved.begin(), moved.end(), static_cast<std::int64_t>(last)) = static_cast<std::int64_t>(i);
    particles_[i] = particles_[last];
    particle_cell_[i] = particle_cell_[last];
  }
  particles_.pop_back();
  particle_cell_.pop_back();
}

void GibbsChain::move_to(std::size_t i, const MarkedParticle& p) {
  const std::size_t c = cell_of(p.position);
  if (c != particle_cell_[i]) {
    auto& own = cells_[particle_cell_[i]];
    own.erase(std::find(own.begin(), own.end(), static_cast<std::int64_t>(i)));
    cells_[c].push_back(static_cast<std::int64_t>(i));
    particle_cell_[i] = c;
  }
  particles_[i] = p;
}

double GibbsChain::local_energy(Point p, Spin s, std::int64_t skip) const {
  if (!interacting_) return 0.0;
  const std::size_t c = cell_of(p);
  const auto cx = static_cast<std::int64_t>(c % cells_per_axis_);
  const auto cy = static_cast<std::int64_t>(c / cells_per_axis_);
  const auto n = static_cast<std::int64_t>(cells_per_axis_);
  const double hc = model_->hardcore_radius();
  double total = 0.0;
  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    const std::int64_t y = cy + dy;
    if (y < 0 || y >= n) continue;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      const std::int64_t x = cx + dx;
      if (x < 0 || x >= n) continue;
      for (std::int64_t h : cells_[static_cast<std::size_t>(y * n + x)]) {
        if (h == skip) continue;
        const MarkedParticle& q =
            h >= 0 ? particles_[static_cast<std::size_t>(h)] : boundary_near_[static_cast<std::size_t>(-1 - h)];
        const double r = norm(q.position - p);
        if (r >= cutoff_) continue;
        if (r < hc) return std::numeric_limits<double>::infinity();
        const double j = model_->J_radial(r);
        if (j != 0.0) total += j * model_->V(spin_gap(s, q.spin));
      }
    }
  }
  return total;
}

double GibbsChain::recompute_energy() {
  double total = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    // Each interior pair is seen twice, each interior-boundary pair once.
    const double full = local_energy(particles_[i].position, particles_[i].spin, static_cast<std::int64_t>(i));
    if (std::isinf(full)) {
      energy_ = full;
      return energy_;
    }
    double interior = 0.0;
    if (interacting_) {
      for (std::size_t j = 0; j < particles_.size(); ++j) {
        if (j == i) continue;
        const double r = norm(particles_[j].position - particles_[i].position);
        if (r >= cutoff_) continue;
        interior += model_->J_radial(r) * model_->V(spin_gap(particles_[i].spin, particles_[j].spin));
      }
    }
    total += full - interior / 2.0;
  }
  energy_ = total;
  return energy_;
}

void GibbsChain::step() {
  const MoveMix& mix = params_.mix;
  const double u = rng_.uniform();
  MoveType type = MoveType::rotate;
  if (u < mix.birth) {
    type = MoveType::birth;
  } else if (u < mix.birth + mix.death) {
    type = MoveType::death;
  } else if (u < mix.birth + mix.death + mix.translate) {
    type = MoveType::translate;
  }
  const auto slot = static_cast<std::size_t>(type);
  ++stats_.proposed[slot];
  ++steps_;
  const std::size_t n = particles_.size();
  const double t = window_.half_width();
  const double area = window_.area();

  switch (type) {
    case MoveType::birth: {
      const Point p{rng_.uniform(-t, t), rng_.uniform(-t, t)};
      const Spin s = params_.spin_frame + Spin::from_ticks(rng_.next());
      const double accept_u = rng_.uniform();
      if (!window_.contains(p)) break;
      const double dH = local_energy(p, s, std::numeric_limits<std::int64_t>::min());
      if (accept_u < birth_acceptance(params_.z, area, n, mix, dH)) {
        insert({p, s});
        energy_ += dH;
        ++stats_.accepted[slot];
      }
      break;
    }
    case MoveType::death: {
      if (n == 0) break;
      const auto i = static_cast<std::size_t>(rng_.index(n));
      const double accept_u = rng_.uniform();
      const double dH = -local_energy(particles_[i].position, particles_[i].spin, static_cast<std::int64_t>(i));
      if (accept_u < death_acceptance(params_.z, area, n, mix, dH)) {
        erase(i);
        energy_ += dH;
        ++stats_.accepted[slot];
      }
      break;
    }
    case MoveType::translate: {
      if (n == 0) break;
      const auto i = static_cast<std::size_t>(rng_.index(n));
      const double a = params_.translate_scale;
      const Point p = particles_[i].position + Point{rng_.uniform(-a, a), rng_.uniform(-a, a)};
      const double accept_u = rng_.uniform();
      if (!window_.contains(p)) break;
      const auto self = static_cast<std::int64_t>(i);
      const double before = local_energy(particles_[i].position, particles_[i].spin, self);
      const double after = local_energy(p, particles_[i].spin, self);
      const double dH = std::isinf(after) ? after : after - before;
      if (accept_u < metropolis_acceptance(dH)) {
        move_to(i, {p, particles_[i].spin});
        energy_ += dH;
        ++stats_.accepted[slot];
      }
      break;
    }
    case MoveType::rotate: {
      if (n == 0) break;
      const auto i = static_cast<std::size_t>(rng_.index(n));
      const Spin s = particles_[i].spin + Spin::from_angle(rng_.uniform(-params_.rotate_scale, params_.rotate_scale));
      const double accept_u = rng_.uniform();
      const auto self = static_cast<std::int64_t>(i);
      const double before = local_energy(particles_[i].position, particles_[i].spin, self);
      const double after = local_energy(particles_[i].position, s, self);
      const double dH = after - before;
      if (accept_u < metropolis_acceptance(dH)) {
        particles_[i].spin = s;
        energy_ += dH;
        ++stats_.accepted[slot];
      }
      break;
    }
  }
  if (steps_ % params_.recompute_interval == 0) recompute_energy();
}

void GibbsChain::sweep() {
  for (std::size_t k = 0; k < steps_per_sweep_; ++k) step();
}

void GibbsChain::run_sweeps(std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) sweep();
}

Configuration GibbsChain::inside() const { return Configuration(particles_); }

ChainState mcmc_step(const ChainState& state, const PairPotentialModel& model, const Window& window,
                     const SamplerParams& params, Rng& rng) {
  GibbsChain chain(model, window, state.boundary, state.inside, params, rng);
  chain.step();
  rng = chain.rng();
  return {chain.inside(), state.boundary, chain.cached_energy()};
}

void run_chain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
               const Configuration& initial, const SamplerParams& params,
               const std::function<void(std::size_t, const GibbsChain&)>& on_sample) {
  GibbsChain chain(model, window, boundary, initial, params);
  if (params.sweeps == 0) {
    on_sample(0, chain);
    return;
  }
  const auto burn = static_cast<std::size_t>(std::floor(params.burn_in_fraction * static_cast<double>(params.sweeps)));
  chain.run_sweeps(burn);
  for (std::size_t k = burn; k < params.sweeps; ++k) {
    chain.sweep();
    on_sample(k, chain);
  }
}

std::vector<Configuration> sample_gibbs(const PairPotentialModel& model, const Window& window,
                                        const Configuration& boundary, const SamplerParams& params,
                                        const Configuration& initial) {
  std::vector<Configuration> out;
  run_chain(model, window, boundary, initial, params,
            [&](std::size_t, const GibbsChain& chain) { out.push_back(chain.inside()); });
  return out;
}

CoarseLabel coarse_label(const Configuration& inside) {
  int left = 0, aligned = 0;
  for (const auto& p : inside) {
    if (p.position.x < 0.0) ++left;
    if (std::cos(p.spin.angle()) > 0.0) ++aligned;
  }
  return {static_cast<int>(inside.size()), left, aligned};
}

ExactReference exact_reference(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
                               double z, int kmax, int grid, int spin_grid) {
  if (kmax < 0 || kmax > 3) throw std::invalid_argument("exact_reference supports kmax in 0..3");
  if (grid < 2 || grid % 2 != 0) throw std::invalid_argument("position grid must be even and >= 2");
  if (spin_grid < 4 || spin_grid % 4 != 0) throw std::invalid_argument("spin grid must be a positive multiple of 4");
  if (!(z >= 0.0)) throw std::invalid_argument("activity must be >= 0");
  for (const auto& b : boundary)
    if (window.contains(b.position)) throw std::invalid_argument("boundary particle inside the window");

  ExactReference out;
  const double mu = z * window.area();
  // P(N > kmax) for Poisson(mu), summed directly from the upper terms.
  {
    double term = std::exp(-mu);
    for (int k = 0; k <= kmax; ++k) term *= mu / (k + 1);
    double tail = 0.0;
    for (int k = kmax + 1; k < kmax + 200 && term > 0.0; ++k) {
      tail += term;
      term *= mu / (k + 1);
    }
    out.poisson_tail = tail;
  }
  if (out.poisson_tail > 1e-6) {
    std::ostringstream msg;
    msg << "exact_reference: Poisson mass beyond " << kmax << " particles is " << out.poisson_tail << " > 1e-6";
    throw std::runtime_error(msg.str());
  }

  // Nodes: midpoints of the position grid times arc centers of the spin grid.
  const double t = window.half_width();
  const double dx = 2.0 * t / grid;
  struct Node {
    MarkedParticle p;
    int left;
    int aligned;
  };
  std::vector<Node> nodes;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      for (int k = 0; k < spin_grid; ++k) {
        const Point pos{-t + (i + 0.5) * dx, -t + (j + 0.5) * dx};
        const double angle = kTwoPi * (k + 0.5) / spin_grid;
        nodes.push_back({{pos, Spin::from_angle(angle)}, pos.x < 0.0 ? 1 : 0, std::cos(angle) > 0.0 ? 1 : 0});
      }
  const std::size_t m = nodes.size();
  // Per-node weight of one particle: z * cell volume * spin weight * e^{-W(node, boundary)}.
  const double unit = z * dx * dx / spin_grid;
  std::vector<double> single(m);
  for (std::size_t a = 0; a < m; ++a) {
    ExtendedEnergy w;
    for (const auto& b : boundary) w += pair_energy(model, nodes[a].p, b);
    single[a] = unit * w.boltzmann();
  }
  std::vector<double> pair;
  if (kmax >= 2) {
    pair.assign(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b || nodes[a].p.position == nodes[b].p.position) {
          // Coincident positions: a hard core excludes them, otherwise the
          // interaction is taken at zero separation.
          pair[a * m + b] = model.hardcore_radius() > 0.0 ? 0.0 : std::exp(-model.J_radial(0.0) * model.V(spin_gap(nodes[a].p.spin, nodes[b].p.spin)));
        } else {
          pair[a * m + b] = pair_energy(model, nodes[a].p, nodes[b].p).boltzmann();
        }
      }
  }

  LabelDistribution weights;
  weights[{0, 0, 0}] = 1.0;
  if (kmax >= 1)
    for (std::size_t a = 0; a < m; ++a) weights[{1, nodes[a].left, nodes[a].aligned}] += single[a];
  if (kmax >= 2) {
    // Ordered tuples with the 1/k! factor.
    std::map<std::pair<int, int>, double> acc2;
    for (std::size_t a = 0; a < m; ++a) {
      if (single[a] == 0.0) continue;
      for (std::size_t b = 0; b < m; ++b) {
        const double w = single[a] * single[b] * pair[a * m + b];
        if (w == 0.0) continue;
        acc2[{nodes[a].left + nodes[b].left, nodes[a].aligned + nodes[b].aligned}] += w / 2.0;
      }
    }
    for (const auto& [key, w] : acc2) weights[{2, key.first, key.second}] += w;
  }
  if (kmax >= 3) {
    std::vector<double> acc3(16, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      if (single[a] == 0.0) continue;
      for (std::size_t b = 0; b < m; ++b) {
        const double wab = single[a] * single[b] * pair[a * m + b];
        if (wab == 0.0) continue;
        const double* row_a = &pair[a * m];
        const double* row_b = &pair[b * m];
        const int la = nodes[a].left + nodes[b].left;
        const int sa = nodes[a].aligned + nodes[b].aligned;
        for (std::size_t c = 0; c < m; ++c) {
          const double w = single[c] * row_a[c] * row_b[c];
          if (w == 0.0) continue;
          acc3[static_cast<std::size_t>((la + nodes[c].left) * 4 + sa + nodes[c].aligned)] += wab * w;
        }
      }
    }
    for (int l = 0; l < 4; ++l)
      for (int s = 0; s < 4; ++s)
        if (acc3[static_cast<std::size_t>(l * 4 + s)] > 0.0)
          weights[{3, l, s}] += acc3[static_cast<std::size_t>(l * 4 + s)] / 6.0;
  }

  double Z = 0.0;
  for (const auto& [key, w] : weights) Z += w;
  out.partition_function = Z;
  for (auto& [key, w] : weights) out.distribution[key] = w / Z;

  // Gibbs mass beyond kmax. With k particles the interior energy is at least
  // -min(k S / 2, k (k - 1) / 2 sup|J| |V|_inf) (S the neighbour energy bound)
  // and each particle meets boundary particle b with energy at least
  // -|V|_inf psi(d_b), d_b the distance from b to the window.
  // A hard core caps k at one particle per half-open cell of side r, and
  // Z >= 1 from the empty configuration.
  {
    const double pair_max = model.sup_abs_J() * model.sup_abs_V();
    const double S = model.neighbour_energy_bound();
    std::int64_t kcap = kmax + 400;
    if (model.hardcore_radius() > 0.0) {
      const auto per_axis = static_cast<std::int64_t>(std::ceil(2.0 * t / model.hardcore_radius()));
      kcap = per_axis * per_axis;
    }
    double boundary_max = 0.0;
    for (const auto& b : boundary) {
      const double d = std::max({std::abs(b.position.x) - t, std::abs(b.position.y) - t, 0.0});
      boundary_max += model.sup_abs_V() * model.psi(d);
    }
    double tail = 0.0;
    for (std::int64_t k = kmax + 1; k <= kcap; ++k) {
      const double kd = static_cast<double>(k);
      const double interior = std::min(kd * S / 2.0, kd * (kd - 1.0) / 2.0 * pair_max);
      const double log_term = kd * std::log(mu) - std::lgamma(kd + 1.0) + interior + kd * boundary_max;
      tail += std::exp(log_term);
    }
    out.gibbs_tail_bound = mu == 0.0 ? 0.0 : tail;
  }
  return out;
}

LabelDistribution empirical_labels(std::span<const Configuration> samples) {
  LabelDistribution out;
  if (samples.empty()) return out;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) out[coarse_label(s)] += w;
  return out;
}

double total_variation(const LabelDistribution& a, const LabelDistribution& b) {
  std::set<CoarseLabel> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double tv = 0.0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    tv += std::abs((ia == a.end() ? 0.0 : ia->second) - (ib == b.end() ? 0.0 : ib->second));
  }
  return tv / 2.0;
}

RuelleDiagnostics correlation_diagnostic(std::span<const Configuration> samples, double z, int m,
                                         const TestFunction& f) {
  if (m < 1 || m > 3) throw std::invalid_argument("correlation order must be 1, 2 or 3");
  if (!(z > 0.0)) throw std::invalid_argument("activity must be positive");
  RuelleDiagnostics d;
  d.m = m;
  double sum = 0.0;
  for (const auto& cfg : samples) {
    const auto pts = cfg.positions();
    const std::size_t n = pts.size();
    Point tuple[3];
    if (m == 1) {
      for (std::size_t a = 0; a < n; ++a) {
        tuple[0] = pts[a];
        sum += f.f({tuple, 1});
      }
    } else if (m == 2) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          tuple[0] = pts[a];
          tuple[1] = pts[b];
          sum += f.f({tuple, 2});
        }
    } else {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          for (std::size_t c = 0; c < n; ++c) {
            if (c == a || c == b) continue;
            tuple[0] = pts[a];
            tuple[1] = pts[b];
            tuple[2] = pts[c];
            sum += f.f({tuple, 3});
          }
        }
    }
  }
  d.lhs = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
  d.rhs_unit = std::pow(z, m) * f.integral;
  const double floor = std::numeric_limits<double>::min();
  d.xi_hat = (d.lhs > 0.0 && d.rhs_unit > 0.0) ? std::max(floor, std::pow(d.lhs / d.rhs_unit, 1.0 / m)) : floor;
  return d;
}

}  // namespace gibbsym
