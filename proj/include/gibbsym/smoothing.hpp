#pragma once

#include <vector>

#include "gibbsym/potential.hpp"
#include "gibbsym/spline.hpp"

namespace gibbsym {

// f(t) = C exp(-delta^2 / (delta^2 - t^2)) on (-delta, delta), 0 outside,
// with C the reciprocal of the integral of the unnormalized bump.
struct SmoothingKernel {
  double delta = 0.0;
  double normalizer = 0.0;
  double second_derivative_sup = 0.0;

  double operator()(double t) const;
  double first_derivative(double t) const;
  double second_derivative(double t) const;
};

SmoothingKernel mollifier(double delta);

// Largest delta (capped at pi/4) such that |V(s') - V(s)| < eps/2 whenever
// |s' - s| < 2 delta, certified on a grid that includes V's breakpoints.
double continuity_modulus(const PeriodicFunction& V, double epsilon);

// The mollified function m = f_delta * V and its exact second derivative
// f_delta'' * V, by composite Simpson split at V's breakpoints.
double mollified(const PeriodicFunction& V, const SmoothingKernel& kernel, double sigma);
double mollified_second(const PeriodicFunction& V, const SmoothingKernel& kernel, double sigma);

enum class Branch { plus, minus };

// plus:  V = Vbar - v with Vbar = m + eps/2.
// minus: V = Vbar + v with Vbar = m - eps/2.
// In both cases 0 < v < eps. Vbar is held as a periodic C^2 spline through
// the symmetrized mollified values, and that spline is the smooth potential
// used downstream.
class SmoothDecomposition {
 public:
  static constexpr std::size_t kSplineNodes = 4096;

  SmoothDecomposition() = default;
  SmoothDecomposition(PeriodicFunction V, double epsilon, double delta, Branch branch);

  double epsilon() const { return epsilon_; }
  double delta() const { return kernel_.delta; }
  Branch branch() const { return branch_; }
  const SmoothingKernel& kernel() const { return kernel_; }
  const PeriodicFunction& V_function() const { return V_; }

  double V(double s) const { return V_(s); }
  double Vbar(double s) const { return spline_(s); }
  double v(double s) const { return branch_ == Branch::plus ? spline_(s) - V_(s) : V_(s) - spline_(s); }
  double Vbar_second(double s) const { return spline_.second_derivative(s); }

  // Certified upper bound on sup |Vbar''|.
  double Vbar_second_sup() const { return Vbar_second_sup_; }
  // 2 delta |f''| |V|.
  double second_derivative_bound() const { return 2.0 * kernel_.delta * kernel_.second_derivative_sup * V_.sup_abs; }

  const PeriodicCubicSpline& spline() const { return spline_; }

 private:
  friend double second_derivative_sup(const SmoothDecomposition&);

  PeriodicFunction V_;
  double epsilon_ = 0.0;
  SmoothingKernel kernel_;
  Branch branch_ = Branch::plus;
  PeriodicCubicSpline spline_;
  double Vbar_second_sup_ = 0.0;
};

SmoothDecomposition smooth_decompose(const PeriodicFunction& V, double epsilon);

struct SignSplitDecomposition {
  SmoothDecomposition plus;
  SmoothDecomposition minus;

  const SmoothDecomposition& for_coupling(double j) const { return j < 0.0 ? minus : plus; }
};

SignSplitDecomposition sign_split_decompose(const PeriodicFunction& V, double epsilon);

// J Vbar(s1 - s2) + K for the smooth potential, with Vbar taken from the
// branch matching the sign of J. Throws on coincident positions.
ExtendedEnergy smooth_pair_energy(const PairPotentialModel& model, const SignSplitDecomposition& split,
                                  const MarkedParticle& a, const MarkedParticle& b);

// Max of |Vbar''| from the analytic convolution on a fine grid and from the
// spline moments, after checking the analytic values against central finite
// differences of the exact convolution. Throws std::runtime_error if the two
// disagree by more than 1e-4 relative to the sup.
double second_derivative_sup(const SmoothDecomposition& decomp);

struct DecompositionReport {
  double max_reconstruction_error = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  double max_asymmetry = 0.0;
};

// Evaluates the decomposition invariants on `points` equally spaced angles
// starting at `offset`.
DecompositionReport inspect(const SmoothDecomposition& decomp, std::size_t points = 4096, double offset = 0.0);

}  // namespace gibbsym
