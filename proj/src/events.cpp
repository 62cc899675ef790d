#include "gibbsym/events.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbsym {

TestEvent spin_sector_event(double n_prime, double lo, double hi, int min_count) {
  if (!(hi > lo) || hi - lo > kTwoPi) throw std::invalid_argument("spin sector must satisfy lo < hi <= lo + 2 pi");
  const Spin start = Spin::from_angle(lo);
  const double width = hi - lo;
  TestEvent e;
  e.name = "sector";
  e.n_prime = n_prime;
  e.on_window = [start, width, min_count](const Configuration& w) {
    int hits = 0;
    for (const auto& p : w)
      if ((p.spin - start).angle() < width) ++hits;
    return hits >= min_count;
  };
  return e;
}

TestEvent count_band_event(double n_prime, int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("count band must satisfy lo <= hi");
  TestEvent e;
  e.name = "count-band";
  e.n_prime = n_prime;
  e.on_window = [lo, hi](const Configuration& w) {
    const auto k = static_cast<long long>(w.size());
    return k >= lo && k <= hi;
  };
  return e;
}

TestEvent half_plane_event(double n_prime, double direction) {
  TestEvent e;
  e.name = "half-plane";
  e.n_prime = n_prime;
  const Spin d = Spin::from_angle(direction);
  e.on_window = [d](const Configuration& w) {
    double sum = 0.0;
    for (const auto& p : w) sum += std::cos((p.spin - d).angle());
    return !w.empty() && sum > 0.0;
  };
  return e;
}

TestEvent full_event(double n_prime) {
  return {"full", n_prime, [](const Configuration&) { return true; }};
}

TestEvent empty_event(double n_prime) {
  return {"impossible", n_prime, [](const Configuration&) { return false; }};
}

SpinSum window_spin_sum(const Configuration& cfg, double n_prime) {
  const Window w(n_prime);
  SpinSum out;
  for (const auto& p : cfg)
    if (w.contains(p.position)) {
      const double a = p.spin.angle();
      out.c += std::cos(a);
      out.s += std::sin(a);
      ++out.count;
    }
  return out;
}

}  // namespace gibbsym
