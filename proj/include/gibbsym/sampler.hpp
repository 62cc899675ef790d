#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "gibbsym/geometry.hpp"
#include "gibbsym/potential.hpp"
#include "gibbsym/rng.hpp"

namespace gibbsym {

enum class MoveType { birth = 0, death = 1, translate = 2, rotate = 3 };

struct MoveMix {
  double birth = 0.25;
  double death = 0.25;
  double translate = 0.25;
  double rotate = 0.25;
};

struct SamplerParams {
  double z = 1.0;
  std::size_t sweeps = 100;
  MoveMix mix;
  double translate_scale = 0.5;
  double rotate_scale = 1.0;  // spin moves are uniform in [-rotate_scale, rotate_scale]
  std::uint64_t seed = 1;
  double burn_in_fraction = 0.2;
  std::size_t steps_per_sweep = 0;  // 0 means max(1, ceil(z * area))
  // Offset added to every birth spin. Chains whose boundary and initial state
  // are rotated by the same angle and use it as frame make identical decisions.
  Spin spin_frame;
  std::size_t recompute_interval = 20000;

  void validate() const;
};

// Acceptance probabilities of the grand-canonical Metropolis-Hastings moves.
// `dH` is H(new) - H(old); +inf is always rejected.
double birth_acceptance(double z, double area, std::size_t n_before, const MoveMix& mix, double dH);
double death_acceptance(double z, double area, std::size_t n_before, const MoveMix& mix, double dH);
double metropolis_acceptance(double dH);

Configuration sample_poisson(const Window& window, double z, std::uint64_t seed);
Configuration sample_poisson(const Window& window, double z, Rng& rng, std::optional<Spin> fixed_spin = std::nullopt);

// Keeps particles in order, dropping any closer than `radius` (sup norm) to
// an already kept particle or to a particle of `fixed`.
Configuration hardcore_thin(const Configuration& cfg, double radius, const Configuration& fixed = Configuration{});

struct MoveStats {
  std::array<std::uint64_t, 4> proposed{};
  std::array<std::uint64_t, 4> accepted{};

  double rate(MoveType m) const {
    const auto i = static_cast<std::size_t>(m);
    return proposed[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
  }
};

// Markov chain on interior configurations of a window with a fixed exterior.
// Interactions are found with a cell list whose cells are at least the
// model's interaction cutoff wide.
class GibbsChain {
 public:
  GibbsChain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
             const Configuration& initial, const SamplerParams& params);
  GibbsChain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
             const Configuration& initial, const SamplerParams& params, Rng rng);

  void step();
  void sweep();
  void run_sweeps(std::size_t count);

  Configuration inside() const;
  const Configuration& boundary() const { return boundary_; }
  std::size_t size() const { return particles_.size(); }
  std::span<const MarkedParticle> particles() const { return particles_; }

  double cached_energy() const { return energy_; }
  // Full recompute through the cell list; resets the cache.
  double recompute_energy();
  const MoveStats& stats() const { return stats_; }
  std::size_t steps_per_sweep() const { return steps_per_sweep_; }
  std::uint64_t steps_taken() const { return steps_; }
  const Rng& rng() const { return rng_; }
  const Window& window() const { return window_; }

 private:
  double local_energy(Point p, Spin s, std::int64_t skip) const;
  std::size_t cell_of(Point p) const;
  void insert(const MarkedParticle& p);
  void erase(std::size_t i);
  void move_to(std::size_t i, const MarkedParticle& p);

  const PairPotentialModel* model_;
  Window window_;
  Configuration boundary_;
  SamplerParams params_;
  Rng rng_;

  std::vector<MarkedParticle> particles_;
  std::vector<std::size_t> particle_cell_;
  // Handles: i >= 0 is an interior particle, -1 - b is boundary particle b.
  std::vector<std::vector<std::int64_t>> cells_;
  std::vector<MarkedParticle> boundary_near_;
  double origin_ = 0.0;
  double cell_size_ = 1.0;
  std::size_t cells_per_axis_ = 1;
  double cutoff_ = 0.0;
  bool interacting_ = false;

  double energy_ = 0.0;
  MoveStats stats_;
  std::size_t steps_per_sweep_ = 1;
  std::uint64_t steps_ = 0;
};

struct ChainState {
  Configuration inside;
  Configuration boundary;
  ExtendedEnergy cached_energy;
};

// One proposal from `state`; advances `rng`.
ChainState mcmc_step(const ChainState& state, const PairPotentialModel& model, const Window& window,
                     const SamplerParams& params, Rng& rng);

// Runs burn-in then calls `on_sample` once per remaining sweep. With zero
// sweeps the initial state is the only sample.
void run_chain(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
               const Configuration& initial, const SamplerParams& params,
               const std::function<void(std::size_t, const GibbsChain&)>& on_sample);

std::vector<Configuration> sample_gibbs(const PairPotentialModel& model, const Window& window,
                                        const Configuration& boundary, const SamplerParams& params,
                                        const Configuration& initial = Configuration{});

// Coarse label of an interior configuration: (count, particles with x < 0,
// particles with cos(spin) > 0).
using CoarseLabel = std::tuple<int, int, int>;
CoarseLabel coarse_label(const Configuration& inside);
using LabelDistribution = std::map<CoarseLabel, double>;

struct ExactReference {
  LabelDistribution distribution;
  double poisson_tail = 0.0;  // P(N > kmax) under the Poisson reference measure
  double gibbs_tail_bound = 0.0;  // rigorous bound on the Gibbs mass beyond kmax
  double partition_function = 0.0;
};

// Quadrature of the k <= kmax particle terms of the partition function on a
// midpoint position grid (grid x grid, even) and spin grid (spin_grid points,
// a multiple of 4, at the centers of equal arcs). Throws if the Poisson mass
// beyond kmax exceeds 1e-6.
ExactReference exact_reference(const PairPotentialModel& model, const Window& window, const Configuration& boundary,
                               double z, int kmax, int grid, int spin_grid);

LabelDistribution empirical_labels(std::span<const Configuration> samples);
double total_variation(const LabelDistribution& a, const LabelDistribution& b);

struct RuelleDiagnostics {
  double xi_hat = 0.0;
  int m = 1;
  double lhs = 0.0;  // empirical mean of the distinct-tuple sum
  double rhs_unit = 0.0;  // z^m times the integral of f
};

struct TestFunction {
  std::function<double(std::span<const Point>)> f;
  double integral = 0.0;  // integral of f over the plane^m
};

// Smallest xi with mean sum^{!=} f(x_1..x_m) <= (z xi)^m integral(f), for m in 1..3.
RuelleDiagnostics correlation_diagnostic(std::span<const Configuration> samples, double z, int m,
                                         const TestFunction& f);

}  // namespace gibbsym
