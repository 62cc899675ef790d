#include "gibbsym/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbsym/geometry.hpp"

namespace gibbsym {

namespace {

// Solves the cyclic system m[i-1] + 4 m[i] + m[i+1] = rhs[i] via the
// Sherman-Morrison correction of a plain tridiagonal solve.
std::vector<double> solve_cyclic(const std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  const double a = 1.0, b = 4.0, c = 1.0;
  const double gamma = -b;
  std::vector<double> diag(n, b);
  diag[0] = b - gamma;
  diag[n - 1] = b - a * c / gamma;

  auto thomas = [&](std::vector<double> d) {
    std::vector<double> cp(n), x(n);
    cp[0] = c / diag[0];
    d[0] = d[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = diag[i] - a * cp[i - 1];
      cp[i] = c / denom;
      d[i] = (d[i] - a * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - cp[i] * x[i + 1];
    return x;
  };

  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = c;
  const std::vector<double> x = thomas(rhs);
  const std::vector<double> z = thomas(u);
  const double vx = x[0] + a / gamma * x[n - 1];
  const double vz = z[0] + a / gamma * z[n - 1];
  const double factor = vx / (1.0 + vz);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - factor * z[i];
  return out;
}

}  // namespace

PeriodicCubicSpline::PeriodicCubicSpline(std::vector<double> samples) : y_(std::move(samples)) {
  const std::size_t n = y_.size();
  if (n < 4) throw std::invalid_argument("periodic spline needs at least 4 samples");
  h_ = kTwoPi / static_cast<double>(n);
  std::vector<double> rhs(n);
  const double scale = 6.0 / (h_ * h_);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = scale * (y_[(i + n - 1) % n] - 2.0 * y_[i] + y_[(i + 1) % n]);
  m_ = solve_cyclic(rhs);
}

void PeriodicCubicSpline::locate(double angle, std::size_t& i, double& s) const {
  double t = std::fmod(angle, kTwoPi);
  if (t < 0) t += kTwoPi;
  const double pos = t / h_;
  double fl = std::floor(pos);
  if (fl >= static_cast<double>(y_.size())) fl = static_cast<double>(y_.size()) - 1;
  i = static_cast<std::size_t>(fl);
  s = t - fl * h_;
}

double PeriodicCubicSpline::operator()(double angle) const {
  std::size_t i = 0;
  double s = 0;
  locate(angle, i, s);
  const std::size_t j = (i + 1) % y_.size();
  const double r = h_ - s;
  return m_[i] * r * r * r / (6.0 * h_) + m_[j] * s * s * s / (6.0 * h_) + (y_[i] - m_[i] * h_ * h_ / 6.0) * r / h_ +
         (y_[j] - m_[j] * h_ * h_ / 6.0) * s / h_;
}

double PeriodicCubicSpline::second_derivative(double angle) const {
  std::size_t i = 0;
  double s = 0;
  locate(angle, i, s);
  const std::size_t j = (i + 1) % y_.size();
  return (m_[i] * (h_ - s) + m_[j] * s) / h_;
}

double PeriodicCubicSpline::second_derivative_sup() const {
  double out = 0.0;
  for (double m : m_) out = std::max(out, std::abs(m));
  return out;
}

}  // namespace gibbsym
