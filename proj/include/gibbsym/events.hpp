#pragma once

#include <functional>
#include <string>

#include "gibbsym/geometry.hpp"

namespace gibbsym {

// A cylinder event: its value depends only on the particles in
// Lambda_{n_prime}.
struct TestEvent {
  std::string name;
  double n_prime = 1.0;
  std::function<bool(const Configuration&)> on_window;  // receives the restriction

  bool operator()(const Configuration& cfg) const { return on_window(restrict(cfg, Window(n_prime))); }
};

// At least `min_count` window particles with spin in [lo, hi) (angles taken
// modulo 2 pi, the arc runs counterclockwise from lo).
TestEvent spin_sector_event(double n_prime, double lo, double hi, int min_count);
// Window particle count in [lo, hi].
TestEvent count_band_event(double n_prime, int lo, int hi);
// The mean spin vector of the window particles has positive component along
// `direction`; false for an empty window.
TestEvent half_plane_event(double n_prime, double direction);
TestEvent full_event(double n_prime);
TestEvent empty_event(double n_prime);

// Circular order parameter of the window: sum of e^{i spin} and count.
struct SpinSum {
  double c = 0.0;
  double s = 0.0;
  std::size_t count = 0;
};
SpinSum window_spin_sum(const Configuration& cfg, double n_prime);

}  // namespace gibbsym
