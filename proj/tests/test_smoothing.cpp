#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "gibbsym/potential.hpp"
#include "gibbsym/rng.hpp"
#include "gibbsym/smoothing.hpp"
#include "oracles.hpp"

using namespace gibbsym;

namespace {

const std::filesystem::path kData = GIBBSYM_DATA_DIR;

PeriodicFunction constant(double c) { return {[c](double) { return c; }, {}, std::abs(c)}; }

std::vector<std::pair<std::string, PeriodicFunction>> potentials() {
  const auto tri = PairPotentialModel::tabulated(std::nullopt, LinearTable::read_csv(kData / "v_triangle.csv", true), 0.2);
  const auto clock = PairPotentialModel::tabulated(std::nullopt, LinearTable::read_csv(kData / "v_clock.csv", true), 0.2);
  return {{"-cos", PairPotentialModel::reference().V_function()},
          {"triangle", tri.V_function()},
          {"clock", clock.V_function()}};
}

}  // namespace

TEST_CASE("mollifier is a normalized symmetric bump") {
  for (double delta : {0.01, 0.05, 0.3}) {
    const SmoothingKernel f = mollifier(delta);
    const double mass = oracle::simpson([&](double t) { return f(t); }, -delta, delta, 20000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f(0.0) == doctest::Approx(f.normalizer * std::exp(-1.0)).epsilon(1e-14));
    CHECK(f(delta) == 0.0);
    CHECK(f(-delta) == 0.0);
    CHECK(f(1.5 * delta) == 0.0);
    for (double s : {0.1, 0.5, 0.9}) CHECK(f(s * delta) == f(-s * delta));
    // Derivatives fade at the edge of the support.
    CHECK(std::abs(f.first_derivative(0.999 * delta)) < 1e-100);
    CHECK(std::abs(f.second_derivative(0.999 * delta)) < 1e-100);
    // The reported sup of |f''| dominates a fine grid and is attained up to grid resolution.
    double grid = 0.0;
    for (int k = 0; k <= 20000; ++k) grid = std::max(grid, std::abs(f.second_derivative(-delta + 2 * delta * k / 20000.0)));
    CHECK(f.second_derivative_sup >= grid);
    CHECK(f.second_derivative_sup <= grid * (1 + 1e-4));
    // Second derivative matches finite differences of the first (continuity of f'').
    const double h = delta * 1e-5;
    for (double s : {-0.8, -0.3, 0.0, 0.4, 0.7}) {
      const double t = s * delta;
      const double fd = (f.first_derivative(t + h) - f.first_derivative(t - h)) / (2 * h);
      CHECK(fd == doctest::Approx(f.second_derivative(t)).epsilon(1e-5).scale(f.second_derivative_sup));
    }
  }
  CHECK_THROWS_AS(mollifier(0.0), std::invalid_argument);
}

TEST_CASE("continuity modulus") {
  CHECK(continuity_modulus(constant(0.7), 0.1) == doctest::Approx(std::numbers::pi / 4));
  const auto V = PairPotentialModel::reference().V_function();
  const double d = continuity_modulus(V, 0.1);
  CHECK(d >= 0.02);
  Rng rng(31);
  for (int k = 0; k < 100000; ++k) {
    const double s = rng.uniform(0.0, kTwoPi);
    const double t = s + rng.uniform(-2 * d, 2 * d);
    CHECK(std::abs(V(t) - V(s)) < 0.05);
  }
  CHECK_THROWS_AS(continuity_modulus(V, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(continuity_modulus(V, 1.0), std::invalid_argument);
}

TEST_CASE("constant potential decomposes trivially") {
  const auto split = sign_split_decompose(constant(0.3), 0.2);
  for (double s : {0.0, 1.0, 3.0, 5.5}) {
    CHECK(split.plus.v(s) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(split.minus.v(s) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(split.plus.Vbar(s) == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(split.minus.Vbar(s) == doctest::Approx(0.2).epsilon(1e-10));
  }
  CHECK(split.plus.Vbar_second_sup() <= 1e-10);
}

TEST_CASE("decomposition invariants for -cos and tabulated potentials") {
  for (const auto& [name, V] : potentials()) {
    CAPTURE(name);
    for (double eps : {0.05, 0.114, 0.3}) {
      CAPTURE(eps);
      const auto split = sign_split_decompose(V, eps);
      CHECK(split.plus.delta() == split.minus.delta());
      CHECK(split.plus.delta() == continuity_modulus(V, eps));
      for (const SmoothDecomposition* d : {&split.plus, &split.minus}) {
        const double sign = d->branch() == Branch::plus ? 1.0 : -1.0;
        double worst = 0.0, vmin = 1e9, vmax = -1e9, asym = 0.0;
        for (int k = 0; k < 4096; ++k) {
          for (double off : {0.0, 0.5}) {
            const double s = kTwoPi * (k + off) / 4096.0;
            worst = std::max(worst, std::abs(d->Vbar(s) - sign * d->v(s) - V(s)));
            vmin = std::min(vmin, d->v(s));
            vmax = std::max(vmax, d->v(s));
            asym = std::max(asym, std::abs(d->Vbar(s) - d->Vbar(kTwoPi - s)));
          }
        }
        CHECK(worst <= 1e-10);
        CHECK(vmin > 0.0);
        CHECK(vmax < eps);
        CHECK(asym <= 1e-12);
        CHECK(d->Vbar_second_sup() <= d->second_derivative_bound() + 1e-8);
        // Independent check of the smooth part: Simpson convolution of V with the kernel.
        const SmoothingKernel f = d->kernel();
        for (double s : {0.3, 1.7, 3.0, 4.4}) {
          std::vector<double> cuts{-f.delta, f.delta};
          for (double b : V.breakpoints)
            for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
              const double t = b + shift - s;
              if (t > -f.delta && t < f.delta) cuts.push_back(t);
            }
          std::sort(cuts.begin(), cuts.end());
          double m = 0.0;
          for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            m += oracle::simpson([&](double t) { return f(t) * V(s + t); }, cuts[i], cuts[i + 1], 4000);
          CHECK(d->Vbar(s) == doctest::Approx(m + sign * eps / 2).epsilon(1e-9));
        }
        // Finite differences of the smooth part stay below the certified bound.
        const double h = 1e-3;
        for (int k = 0; k < 512; ++k) {
          const double s = kTwoPi * (k + 0.25) / 512.0;
          const double fd = (d->Vbar(s + h) - 2 * d->Vbar(s) + d->Vbar(s - h)) / (h * h);
          CHECK(std::abs(fd) <= d->Vbar_second_sup() * (1 + 1e-3) + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("mollification contracts the curvature of -cos") {
  const auto split = sign_split_decompose(PairPotentialModel::reference().V_function(), 0.1);
  const double d = split.plus.delta();
  CHECK(split.plus.Vbar_second_sup() <= 1.0 + 1e-6);
  CHECK(split.plus.Vbar_second_sup() >= 0.9 * std::exp(-d * d / 2));
  CHECK(second_derivative_sup(split.plus) == doctest::Approx(split.plus.Vbar_second_sup()).epsilon(1e-6));
}

TEST_CASE("mollified second derivative matches finite differences of the convolution") {
  const auto V = potentials()[2].second;
  const SmoothingKernel f = mollifier(0.05);
  const double h = 0.05 / 64;
  for (double s : {0.2, 1.1, 2.5, 4.0, 5.9}) {
    const double fd = (mollified(V, f, s + h) - 2 * mollified(V, f, s) + mollified(V, f, s - h)) / (h * h);
    CHECK(mollified_second(V, f, s) == doctest::Approx(fd).epsilon(1e-4).scale(10.0));
  }
}

TEST_CASE("inspect reports the invariants") {
  const auto d = smooth_decompose(PairPotentialModel::reference().V_function(), 0.1);
  const auto r = inspect(d);
  CHECK(r.max_reconstruction_error <= 1e-10);
  CHECK(r.min_v > 0.0);
  CHECK(r.max_v < 0.1);
  CHECK(r.max_asymmetry <= 1e-12);
  CHECK_THROWS(smooth_decompose(PairPotentialModel::reference().V_function(), 0.0));
}
