#pragma once

#include <cstddef>
#include <vector>

#include "gibbsym/bonds.hpp"
#include "gibbsym/geometry.hpp"
#include "gibbsym/potential.hpp"
#include "gibbsym/smoothing.hpp"

namespace gibbsym {

// q(s) = 1 for s <= 2, 1/(s log s) beyond.
double q(double s);
// Integral of q over [0, k]; throws for k < 0.
double Q(double k);
// 1 for s <= 0, (Q(k) - Q(s))/Q(k) on (0, k), 0 for s >= k. Throws for k <= 0.
double taper(double s, double k);

struct TaperParams {
  double tau = 0.5;
  int R = 4;
  int n = 16;
  int n_prime = 2;

  // Throws unless n > R > n_prime >= 1 and 0 < tau < pi.
  void validate() const;
};

// tau * taper(|x| - R, n - R).
double tau_n(Point x, const TaperParams& params);

struct DeformationField {
  std::vector<double> angle;
  std::vector<std::size_t> witness;
};

// Minimum of tau_n over each cluster. The witness is the member of largest
// norm (smallest id on ties), which attains the minimum and is never closer
// to the origin than the particle itself; particles with |x| >= n are their
// own witness.
DeformationField cluster_taper(const Configuration& cfg, const ClusterDecomposition& clusters,
                               const TaperParams& params);

// Sum over the pairs of `pairs` of |J| (angle_i - angle_j)^2.
double dirichlet_energy(const Configuration& cfg, const PairPotentialModel& model, const BondSet& pairs,
                        const DeformationField& field);

struct GoodSetVerdict {
  bool range_ok = false;
  bool energy_ok = false;
  bool is_good = false;
  double range = 0.0;      // cluster range of the test window
  double energy = 0.0;     // dirichlet energy over E(X, n)
  double threshold = 0.0;  // 2 / |Vbar''|, +inf when |Vbar''| = 0
};

// Larger of the certified sup |Vbar''| of the two branches.
double vbar_second_bound(const SignSplitDecomposition& split);

// Evaluates both clauses for the open bonds `open` over the configuration.
GoodSetVerdict good_set_verdict(const Configuration& cfg, const PairPotentialModel& model,
                                const SignSplitDecomposition& split, const std::vector<Bond>& open,
                                const TaperParams& params);

// Shifts every spin by direction * field angle. Spins are fixed point, so
// +1 followed by -1 restores the input bit for bit.
Configuration apply_deformation(const Configuration& cfg, const DeformationField& field, int direction);

struct TaylorMargin {
  double margin = 0.0;            // (e/2)(e^{-dminus} + e^{-dplus}) - 1
  double delta_minus = 0.0;       // H(tau^{-1} Y) - H(Y)
  double delta_plus = 0.0;        // H(tau Y) - H(Y)
  double second_difference = 0.0; // delta_minus + delta_plus
  double bound = 0.0;             // |Vbar''| * dirichlet energy
  bool finite = true;             // false when H(Y) is infinite; margin is then 0

  bool bound_ok() const { return second_difference <= bound * (1.0 + 1e-12) + 1e-12; }
};

// Convexity margin of the smooth Hamiltonian over the pairs of E(X, n),
// relative to e^{-H(Y)}. The smooth pair energy uses the branch matching the
// sign of J.
TaylorMargin taylor_margin(const Configuration& cfg, const PairPotentialModel& model,
                           const SignSplitDecomposition& split, const BondSet& pairs, const DeformationField& field);

// Two-dimensional quadrature of q(|x| - R)^2 over Lambda_n.
double taper_square_integral(int R, int n);
// 8 (R + 3)^2 + 8 R Q(n - R).
double taper_square_bound(int R, int n);

}  // namespace gibbsym
