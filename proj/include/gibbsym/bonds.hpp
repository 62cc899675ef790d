#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <span>
#include <vector>

#include "gibbsym/geometry.hpp"
#include "gibbsym/potential.hpp"
#include "gibbsym/smoothing.hpp"

namespace gibbsym {

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;

  friend auto operator<=>(const Bond&, const Bond&) = default;
};

// Canonical bond with i < j; throws on i == j.
Bond make_bond(std::size_t a, std::size_t b);

// Bonds over a fixed configuration. Every bond has J != 0, separation below
// the model's interaction cutoff and at least one endpoint in the window.
struct BondSet {
  std::vector<Bond> bonds;
  double window_half_width = 0.0;

  std::size_t size() const { return bonds.size(); }
};

BondSet bond_set(const Configuration& cfg, const PairPotentialModel& model, double n);

// p = 1 - exp(-J v(s1 - s2)) for J > 0 with the plus decomposition, or
// |J| v_minus with the minus decomposition when J < 0. Throws when the sign
// of J does not match the decomposition branch.
double conditional_bond_probability(const PairPotentialModel& model, const SmoothDecomposition& decomp,
                                    const MarkedParticle& y1, const MarkedParticle& y2);
double conditional_bond_probability(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                    const MarkedParticle& y1, const MarkedParticle& y2);

// Relative error between sum_{A subset E} prod_{e in A}(e^{w_e} - 1) and
// prod_e e^{w_e}, by enumerating all subsets. |E| <= 20.
double expansion_identity_check(std::span<const double> weights);

struct BondSample {
  std::vector<Bond> bonds;          // all of bond_set
  std::vector<double> probability;  // conditional probability per bond
  std::vector<bool> present;
  double window_half_width = 0.0;

  BondSet present_set() const;
};

BondSample sample_bonds(const Configuration& cfg, const PairPotentialModel& model, const SignSplitDecomposition& split,
                        double n, std::uint64_t seed);

// |J(x1 - x2)| epsilon; throws if it leaves [0, 1].
double bernoulli_probability(const PairPotentialModel& model, double epsilon, const MarkedParticle& y1,
                             const MarkedParticle& y2);

// eps_e + (eps_e - 1)(e^w - 1).
double holley_bracket(double eps_e, double w);
// Checks the bracket for w = |J| v(s) over spin_grid equally spaced s.
bool holley_single_bond_check(const PairPotentialModel& model, const SmoothDecomposition& decomp, double epsilon,
                              Point x1, Point x2, std::size_t spin_grid);

struct DominationResult {
  bool ok = false;
  double min_slack = 0.0;  // min over up-sets of pi_eps(F) - pi(F)
  std::size_t upsets_checked = 0;
};

// pi is a law on subsets of m <= 4 bonds indexed by bitmask; eps are the
// Bernoulli probabilities. Enumerates every up-closed family of subsets.
DominationResult exhaustive_domination_check(std::span<const double> pi, std::span<const double> eps,
                                             double tolerance = 1e-9);

// Bond law pi_n of a tiny system, by quadrature over the interior spins.
struct TinyBondLaw {
  Configuration cfg;  // interior followed by boundary
  std::vector<Bond> bonds;
  std::vector<double> pi;   // indexed by bitmask over `bonds`
  std::vector<double> eps;  // Bernoulli probabilities
};

// Interior spins are integrated on a spin_grid^k product grid; boundary
// spins stay fixed. At most 3 interior particles and 4 bonds.
TinyBondLaw tiny_bond_law(const PairPotentialModel& model, const SignSplitDecomposition& split, double epsilon,
                          const Window& window, const std::vector<Point>& interior, const Configuration& boundary,
                          std::size_t spin_grid);

struct ClusterDecomposition {
  std::vector<std::size_t> label;  // clusters numbered by their smallest member
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> max_norm;

  std::size_t count() const { return members.size(); }
};

// Throws if a bond references a particle id >= cfg.size().
ClusterDecomposition clusters(const Configuration& cfg, const std::vector<Bond>& bonds);
inline ClusterDecomposition clusters(const Configuration& cfg, const BondSet& bonds) {
  return clusters(cfg, bonds.bonds);
}

// max over particles in the window of the largest norm in their cluster; 0
// when the window holds no particle.
double cluster_range(const Configuration& cfg, const ClusterDecomposition& cl, const Window& window);

struct ChainBound {
  double bound = 0.0;  // sum over self-avoiding paths of length <= max_len
  double tail = 0.0;   // bound on the remaining path lengths
  bool exact = false;  // true when max_len covers every self-avoiding path

  double total() const { return bound + tail; }
};

ChainBound chain_bound(const Configuration& cfg, const PairPotentialModel& model, double epsilon, std::size_t x1,
                       std::size_t x2, std::size_t max_len);

// A test event on an interior configuration.
struct TinyEvent {
  std::string name;
  std::function<bool(const Configuration&)> holds;
};

struct DecompositionCheck {
  double max_discrepancy = 0.0;
  std::vector<std::pair<std::string, std::pair<double, double>>> events;  // name -> (left, right)
};

// Both sides of the decomposition of the Gibbs kernel into the position
// marginal, the bond law and the conditional spin law, for interior
// configurations of at most kmax <= 2 particles on a grid x grid midpoint
// position grid and spin_grid spins per particle. Throws if the Poisson mass
// beyond kmax exceeds 1e-6.
DecompositionCheck decomposition_identity_check(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                                const Window& window, const Configuration& boundary, double z,
                                                const std::vector<TinyEvent>& events, int kmax = 2, int grid = 4,
                                                int spin_grid = 16);

}  // namespace gibbsym
