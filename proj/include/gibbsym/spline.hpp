#pragma once

#include <vector>

namespace gibbsym {

// C^2 cubic spline through equally spaced samples of a 2*pi-periodic
// function. The second derivative is piecewise linear in the knot moments,
// so its sup norm is exactly the largest |moment|.
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline() = default;
  explicit PeriodicCubicSpline(std::vector<double> samples);

  double operator()(double angle) const;
  double second_derivative(double angle) const;
  double second_derivative_sup() const;

  std::size_t size() const { return y_.size(); }
  const std::vector<double>& samples() const { return y_; }
  const std::vector<double>& moments() const { return m_; }

 private:
  void locate(double angle, std::size_t& i, double& s) const;

  std::vector<double> y_;
  std::vector<double> m_;
  double h_ = 0.0;
};

}  // namespace gibbsym
