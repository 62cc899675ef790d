#include "gibbsym/geometry.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace gibbsym {

Spin Spin::from_angle(double radians) {
  if (!std::isfinite(radians)) throw std::invalid_argument("spin angle must be finite");
  const double turns = radians / kTwoPi;
  double frac = turns - std::floor(turns);
  if (frac >= 1.0 || frac < 0.0) frac = 0.0;
  return from_ticks(static_cast<std::uint64_t>(std::ldexp(frac, 64)));
}

double Spin::angle() const {
  // Keep 53 significant bits so the scaling below is exact before the final product.
  const double frac = std::ldexp(static_cast<double>(ticks_ >> 11), -53);
  const double a = frac * kTwoPi;
  return a < kTwoPi ? a : std::nextafter(kTwoPi, 0.0);
}

Window::Window(double half_width) : half_width_(half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("window half width must be positive and finite");
}

double spin_gap(Spin a, Spin b) {
  std::uint64_t d = (a - b).ticks();
  if (d > (std::uint64_t{1} << 63)) d = 0 - d;
  return Spin::from_ticks(d).angle();
}

CellIndex cell_index(Point p) {
  return {static_cast<std::int64_t>(std::floor(p.x + 0.5)),
          static_cast<std::int64_t>(std::floor(p.y + 0.5))};
}

bool CellIndex::contains(Point p) const { return cell_index(p) == *this; }

Configuration::Configuration(std::vector<MarkedParticle> particles)
    : particles_(std::move(particles)) {
  std::vector<Point> pos;
  pos.reserve(particles_.size());
  for (const auto& p : particles_) {
    if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y))
      throw std::invalid_argument("particle coordinates must be finite");
    pos.push_back(p.position);
  }
  std::sort(pos.begin(), pos.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (std::adjacent_find(pos.begin(), pos.end()) != pos.end())
    throw std::invalid_argument("configuration is not simple: two particles share a position");
}

std::vector<Point> Configuration::positions() const {
  std::vector<Point> out;
  out.reserve(particles_.size());
  for (const auto& p : particles_) out.push_back(p.position);
  return out;
}

Configuration Configuration::rotated(Spin angle) const {
  Configuration out = *this;
  for (auto& p : out.particles_) p.spin = p.spin + angle;
  return out;
}

Configuration concatenate(const Configuration& a, const Configuration& b) {
  std::vector<MarkedParticle> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return Configuration(std::move(all));
}

namespace {

template <typename Pred>
Configuration filter(const Configuration& cfg, Pred pred) {
  std::vector<MarkedParticle> out;
  for (const auto& p : cfg)
    if (pred(p.position)) out.push_back(p);
  return Configuration(std::move(out));
}

}  // namespace

std::size_t count_in(const Configuration& cfg, const Window& region) {
  return static_cast<std::size_t>(
      std::count_if(cfg.begin(), cfg.end(), [&](const MarkedParticle& p) { return region.contains(p.position); }));
}

std::size_t count_in(const Configuration& cfg, const CellIndex& region) {
  return static_cast<std::size_t>(
      std::count_if(cfg.begin(), cfg.end(), [&](const MarkedParticle& p) { return region.contains(p.position); }));
}

Configuration restrict(const Configuration& cfg, const Window& region) {
  return filter(cfg, [&](Point p) { return region.contains(p); });
}

Configuration restrict(const Configuration& cfg, const CellIndex& region) {
  return filter(cfg, [&](Point p) { return region.contains(p); });
}

Configuration restrict_outside(const Configuration& cfg, const Window& region) {
  return filter(cfg, [&](Point p) { return !region.contains(p); });
}

double quadratic_density(const Configuration& cfg, std::size_t n) {
  const auto limit = static_cast<std::int64_t>(n);
  std::map<CellIndex, std::size_t> counts;
  for (const auto& p : cfg) {
    const CellIndex c = cell_index(p.position);
    if (std::abs(c.rx) <= limit && std::abs(c.ry) <= limit) ++counts[c];
  }
  double sum = 0.0;
  for (const auto& [cell, k] : counts) sum += static_cast<double>(k) * static_cast<double>(k);
  const double side = 2.0 * static_cast<double>(n) + 1.0;
  return sum / (side * side);
}

double temperedness(const Configuration& cfg) {
  std::int64_t cover = 0;
  for (const auto& p : cfg) {
    const CellIndex c = cell_index(p.position);
    cover = std::max({cover, std::abs(c.rx), std::abs(c.ry)});
  }
  double best = 0.0;
  for (std::int64_t n = 0; n <= cover; ++n)
    best = std::max(best, quadratic_density(cfg, static_cast<std::size_t>(n)));
  return best;
}

void write_csv(std::ostream& out, const Configuration& cfg) {
  out << "id,x,y,spin\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto& p = cfg[i];
    out << i << ',' << p.position.x << ',' << p.position.y << ',' << p.spin.angle() << '\n';
  }
  out.precision(old);
}

Configuration read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return Configuration{};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,x,y,spin") throw std::runtime_error("configuration CSV: expected header id,x,y,spin");
  std::vector<MarkedParticle> particles;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t id = 0;
    double x = 0, y = 0, s = 0;
    if (!(fields >> id >> x >> y >> s)) throw std::runtime_error("configuration CSV: malformed row " + std::to_string(row));
    if (id != row) throw std::runtime_error("configuration CSV: ids must be 0..N-1 in order");
    particles.push_back({{x, y}, Spin::from_angle(s)});
    ++row;
  }
  return Configuration(std::move(particles));
}

}  // namespace gibbsym
