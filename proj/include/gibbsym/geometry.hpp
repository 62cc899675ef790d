#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace gibbsym {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }

// Maximum norm; every distance in this library is measured with it.
inline double norm(Point p) { return std::max(std::abs(p.x), std::abs(p.y)); }
inline double distance(Point a, Point b) { return norm(a - b); }

// An element of the circle group stored as a fixed-point fraction of a full
// turn (2^64 ticks). Addition wraps modulo 2^64, so rotations compose and
// invert exactly and spin differences are invariant under global rotations.
class Spin {
 public:
  constexpr Spin() = default;

  static Spin from_angle(double radians);
  static constexpr Spin from_ticks(std::uint64_t ticks) {
    Spin s;
    s.ticks_ = ticks;
    return s;
  }

  // Angle in [0, 2*pi).
  double angle() const;
  constexpr std::uint64_t ticks() const { return ticks_; }

  constexpr Spin operator+(Spin other) const { return from_ticks(ticks_ + other.ticks_); }
  constexpr Spin operator-(Spin other) const { return from_ticks(ticks_ - other.ticks_); }
  constexpr Spin operator-() const { return from_ticks(0 - ticks_); }

  friend constexpr bool operator==(Spin, Spin) = default;

 private:
  std::uint64_t ticks_ = 0;
};

// Circular distance between two spins, in [0, pi]. Exactly symmetric in its
// arguments, so even functions of the spin difference evaluate identically
// for (a, b) and (b, a).
double spin_gap(Spin a, Spin b);

struct MarkedParticle {
  Point position;
  Spin spin;

  friend bool operator==(const MarkedParticle&, const MarkedParticle&) = default;
};

// Half-open square [-t, t)^2.
class Window {
 public:
  explicit Window(double half_width);

  double half_width() const { return half_width_; }
  double area() const { return 4.0 * half_width_ * half_width_; }
  bool contains(Point p) const {
    return p.x >= -half_width_ && p.x < half_width_ && p.y >= -half_width_ && p.y < half_width_;
  }

 private:
  double half_width_;
};

// Unit cell C_r = r + [-1/2, 1/2)^2.
struct CellIndex {
  std::int64_t rx = 0;
  std::int64_t ry = 0;

  bool contains(Point p) const;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

CellIndex cell_index(Point p);

// A finite simple marked configuration; the index of a particle is its id.
class Configuration {
 public:
  Configuration() = default;
  // Throws std::invalid_argument if two particles share a position or a
  // coordinate is not finite.
  explicit Configuration(std::vector<MarkedParticle> particles);

  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  const MarkedParticle& operator[](std::size_t i) const { return particles_[i]; }
  std::span<const MarkedParticle> particles() const { return particles_; }
  auto begin() const { return particles_.begin(); }
  auto end() const { return particles_.end(); }

  std::vector<Point> positions() const;

  // Rotates every spin by `angle`.
  Configuration rotated(Spin angle) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<MarkedParticle> particles_;
};

// Union of two position-disjoint configurations (ids of `b` follow those of `a`).
Configuration concatenate(const Configuration& a, const Configuration& b);

std::size_t count_in(const Configuration& cfg, const Window& region);
std::size_t count_in(const Configuration& cfg, const CellIndex& region);

Configuration restrict(const Configuration& cfg, const Window& region);
Configuration restrict(const Configuration& cfg, const CellIndex& region);
Configuration restrict_outside(const Configuration& cfg, const Window& region);

// Mean quadratic particle density per unit square over Lambda_{n+1/2}.
double quadratic_density(const Configuration& cfg, std::size_t n);

// sup_n s_n. For a finite configuration the supremum is attained at some n
// no larger than the covering radius, so this is exact.
double temperedness(const Configuration& cfg);

// CSV with header `id,x,y,spin`, spin in radians, rows ordered by id.
void write_csv(std::ostream& out, const Configuration& cfg);
Configuration read_csv(std::istream& in);

}  // namespace gibbsym
