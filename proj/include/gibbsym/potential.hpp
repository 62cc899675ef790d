#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsym/geometry.hpp"

namespace gibbsym {

class KeyValueFile;

// Energy in (-inf, +inf]. Sums saturate at +inf; the Boltzmann weight of
// +inf is exactly 0.
class ExtendedEnergy {
 public:
  constexpr ExtendedEnergy() = default;
  ExtendedEnergy(double value) : value_(value) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(value) || value == -std::numeric_limits<double>::infinity())
      throw std::domain_error("energy must be finite or +infinity");
  }
  static ExtendedEnergy infinity() { return ExtendedEnergy(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(value_); }
  double value() const { return value_; }
  double boltzmann() const { return is_infinite() ? 0.0 : std::exp(-value_); }

  ExtendedEnergy& operator+=(ExtendedEnergy other) {
    value_ = (is_infinite() || other.is_infinite()) ? std::numeric_limits<double>::infinity() : value_ + other.value_;
    return *this;
  }
  friend ExtendedEnergy operator+(ExtendedEnergy a, ExtendedEnergy b) { return a += b; }
  friend bool operator==(ExtendedEnergy a, ExtendedEnergy b) { return a.value_ == b.value_; }

 private:
  double value_ = 0.0;
};

// Piecewise-linear table. Radial tables are zero beyond the last knot;
// periodic tables wrap from the last knot back to the first plus 2*pi.
class LinearTable {
 public:
  LinearTable() = default;
  LinearTable(std::vector<double> x, std::vector<double> y, bool periodic);
  static LinearTable read_csv(const std::filesystem::path& path, bool periodic);

  double operator()(double t) const;
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  bool periodic() const { return periodic_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  bool periodic_ = false;
};

// A continuous 2*pi-periodic function with its kinks listed, so quadrature
// can split there.
struct PeriodicFunction {
  std::function<double(double)> eval;
  std::vector<double> breakpoints;  // in [0, 2*pi)
  double sup_abs = 0.0;

  double operator()(double angle) const { return eval(angle); }
};

enum class ModelKind { xy, custom_table };

// U(y1, y2) = J(x1 - x2) V(s1 - s2) + K(x1 - x2) with radial J (sup norm),
// hard-core K and an even periodic V.
class PairPotentialModel {
 public:
  // J = j0 exp(-|x|^2), V = -cos, hard core of the given radius.
  static PairPotentialModel reference(double j0 = 1.0, double hardcore_radius = 0.2);
  static PairPotentialModel ideal_gas();
  // A missing table falls back to the reference J (scaled by j0) or to -cos.
  static PairPotentialModel tabulated(std::optional<LinearTable> j_table, std::optional<LinearTable> v_table,
                                      double hardcore_radius, double j0 = 1.0);
  static PairPotentialModel from_keyvalue(const KeyValueFile& kv);
  static PairPotentialModel load(const std::filesystem::path& path);

  ModelKind kind() const { return kind_; }
  std::string name() const;

  double J_radial(double r) const {
    if (j_table_) return (*j_table_)(r);
    return j0_ * std::exp(-r * r);
  }
  double J(Point x) const { return J_radial(norm(x)); }
  double K(Point x) const {
    return norm(x) < hardcore_ ? std::numeric_limits<double>::infinity() : 0.0;
  }
  double V(double angle) const {
    if (v_table_) return (*v_table_)(angle);
    return -std::cos(angle);
  }
  double V(Spin difference) const { return V(difference.angle()); }
  PeriodicFunction V_function() const;

  double hardcore_radius() const { return hardcore_; }
  double j0() const { return j0_; }
  bool interacting() const { return sup_abs_J_ > 0.0; }
  double sup_abs_V() const { return sup_abs_V_; }
  double sup_abs_J() const { return sup_abs_J_; }
  bool has_negative_J() const { return has_negative_J_; }

  // Decreasing envelope with |J(x)|(1 + |x|^2) <= psi(|x|).
  double psi(double r) const;
  // Integral of psi(r) r over [0, inf).
  double psi_s() const { return psi_s_; }
  // Upper bound on 1 + psi(0) + integral of |J(x)|(1 + |x|^2) over the plane.
  double c_J() const { return c_J_; }
  // Upper estimate of the integral of |J(x)| over |x| >= R.
  double tail_constant(double R) const;

  double superstability_A() const { return A_; }
  double superstability_B() const { return B_; }
  // Upper bound on sum_j |J(x_i - x_j)| |V|_inf over any hard-core packing;
  // +inf without a hard core unless J vanishes.
  double neighbour_energy_bound() const { return neighbour_bound_; }
  // Decreasing cell penalty Psi(k) = |V|_inf psi(max(0, k - 1)).
  double lower_reg_Psi(std::int64_t k) const;

  // Pairs farther apart than this contribute |J| |V|_inf below
  // kNegligiblePair; neighbour searches may drop them.
  double interaction_cutoff() const { return cutoff_; }
  double dropped_pair_bound() const { return dropped_bound_; }
  static constexpr double kNegligiblePair = 1e-12;

  void set_superstability(double A, double B);

 private:
  void finalize();

  ModelKind kind_ = ModelKind::xy;
  double j0_ = 1.0;
  double hardcore_ = 0.2;
  std::optional<LinearTable> j_table_;
  std::optional<LinearTable> v_table_;
  std::vector<double> psi_knots_;  // step envelope for tables: psi = psi_steps_[i] on [knot_{i-1}, knot_i)
  std::vector<double> psi_steps_;
  double sup_abs_V_ = 1.0;
  double sup_abs_J_ = 1.0;
  bool has_negative_J_ = false;
  double psi_s_ = 0.0;
  double c_J_ = 0.0;
  double A_ = 1.0;
  double B_ = 0.0;
  double neighbour_bound_ = 0.0;
  double cutoff_ = 0.0;
  double dropped_bound_ = 0.0;
};

// Throws std::invalid_argument on coincident positions.
ExtendedEnergy pair_energy(const PairPotentialModel& model, const MarkedParticle& a, const MarkedParticle& b);
ExtendedEnergy energy(const PairPotentialModel& model, const Configuration& cfg);
ExtendedEnergy interaction(const PairPotentialModel& model, const Configuration& a, const Configuration& b);
// Requires inside within the window and boundary outside it.
ExtendedEnergy hamiltonian(const PairPotentialModel& model, const Window& window, const Configuration& inside,
                           const Configuration& boundary);

// H(cfg) - sum_r [A N_r^2 - B N_r]; nonnegative certifies the instance.
double superstability_margin(const PairPotentialModel& model, const Configuration& cfg);
// W(a, b) + sum_{r,s} Psi(|r - s|) (N_r(a)^2 + N_s(b)^2) / 2.
double lower_regularity_margin(const PairPotentialModel& model, const Configuration& a, const Configuration& b);

}  // namespace gibbsym
