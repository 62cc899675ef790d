#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gibbsym/keyvalue.hpp"
#include "gibbsym/potential.hpp"
#include "gibbsym/rng.hpp"
#include "gibbsym/sampler.hpp"
#include "oracles.hpp"

using namespace gibbsym;

namespace {

const std::filesystem::path kData = GIBBSYM_DATA_DIR;

Configuration random_packing(Rng& rng, double half_width, double z, double core) {
  return hardcore_thin(sample_poisson(Window(half_width), z, rng), core);
}

}  // namespace

TEST_CASE("pair energy of the reference model") {
  const auto m = PairPotentialModel::reference();
  const MarkedParticle a{{0.0, 0.0}, Spin::from_angle(0.3)}, b{{1.0, 0.5}, Spin::from_angle(0.3)};
  CHECK(pair_energy(m, a, b).value() == doctest::Approx(-std::exp(-1.0)).epsilon(1e-14));
  CHECK(pair_energy(m, a, {{0.1, 0.0}, Spin{}}).is_infinite());
  CHECK(pair_energy(PairPotentialModel::ideal_gas(), a, {{0.01, 0.0}, Spin::from_angle(2.0)}).value() == 0.0);
  CHECK_THROWS_AS(pair_energy(m, a, {{0.0, 0.0}, Spin{}}), std::invalid_argument);
}

TEST_CASE("pair energy is symmetric and rotation invariant") {
  const auto m = PairPotentialModel::reference();
  Rng rng(21);
  for (int k = 0; k < 2000; ++k) {
    const MarkedParticle a{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, Spin::from_ticks(rng.next())};
    const MarkedParticle b{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, Spin::from_ticks(rng.next())};
    CHECK(pair_energy(m, a, b) == pair_energy(m, b, a));
  }
  const Configuration cfg = random_packing(rng, 3.0, 2.0, 0.2);
  const double h = energy(m, cfg).value();
  for (int k = 0; k < 20; ++k) {
    const double hr = energy(m, cfg.rotated(Spin::from_ticks(rng.next()))).value();
    CHECK(std::abs(hr - h) <= 1e-12 * std::max(1.0, std::abs(h)));
  }
}

TEST_CASE("energy sums pairs and is order independent") {
  const auto m = PairPotentialModel::reference();
  CHECK(energy(m, Configuration({{{0.0, 0.0}, Spin{}}})).value() == 0.0);
  const MarkedParticle a{{0.0, 0.0}, Spin::from_angle(0.1)}, b{{0.7, 0.2}, Spin::from_angle(1.1)},
      c{{-0.4, 0.9}, Spin::from_angle(2.7)};
  CHECK(energy(m, Configuration({a, b})) == pair_energy(m, a, b));
  const double direct = pair_energy(m, a, b).value() + pair_energy(m, a, c).value() + pair_energy(m, b, c).value();
  CHECK(energy(m, Configuration({a, b, c})).value() == doctest::Approx(direct).epsilon(1e-15));
  CHECK(energy(m, Configuration({c, a, b})).value() == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("interaction and hamiltonian identities") {
  const auto m = PairPotentialModel::reference();
  Rng rng(22);
  CHECK(interaction(m, Configuration({{{0.0, 0.0}, Spin{}}}), Configuration{}).value() == 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Configuration all = random_packing(rng, 2.5, 1.5, 0.2);
    const Window w(1.0);
    const Configuration in = restrict(all, w), out = restrict_outside(all, w);
    const double lhs = energy(m, all).value();
    const double rhs = energy(m, in).value() + energy(m, out).value() + interaction(m, in, out).value();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(interaction(m, in, out).value() == doctest::Approx(interaction(m, out, in).value()).epsilon(1e-14));
    // Pairs with at least one endpoint inside the window.
    double brute = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (w.contains(all[i].position) || w.contains(all[j].position)) brute += pair_energy(m, all[i], all[j]).value();
    CHECK(hamiltonian(m, w, in, out).value() == doctest::Approx(brute).epsilon(1e-12));
    CHECK(hamiltonian(m, w, Configuration{}, out).value() == 0.0);
    CHECK(hamiltonian(m, w, in, Configuration{}) == energy(m, in));
  }
  CHECK_THROWS_AS(hamiltonian(m, Window(1.0), Configuration({{{2.0, 0.0}, Spin{}}}), Configuration{}),
                  std::invalid_argument);
}

TEST_CASE("reference model constants match closed forms") {
  for (double j0 : {1.0, 0.5}) {
    const auto m = PairPotentialModel::reference(j0, 0.2);
    // Integral of f(|x|) over the plane is the integral of 8 r f(r).
    const double integral = oracle::simpson([&](double r) { return 8.0 * r * j0 * std::exp(-r * r) * (1 + r * r); }, 0.0, 12.0, 20000);
    CHECK(integral == doctest::Approx(8.0 * j0).epsilon(1e-10));
    CHECK(m.c_J() >= 1.0 + j0 + integral);
    CHECK(m.c_J() == doctest::Approx(1.0 + 9.0 * j0).epsilon(1e-9));
    CHECK(m.psi_s() == doctest::Approx(j0).epsilon(1e-9));
    CHECK(m.tail_constant(0.0) <= m.c_J());
    CHECK(m.tail_constant(3.0) == doctest::Approx(4.0 * j0 * std::exp(-9.0)).epsilon(1e-6));
    CHECK(m.tail_constant(3.0) >= 4.0 * j0 * std::exp(-9.0));
  }
}

TEST_CASE("psi dominates J and the tail constant decreases") {
  for (const auto& m : {PairPotentialModel::reference(), PairPotentialModel::load(kData / "compact_triangle.model")}) {
    for (int k = 0; k <= 4000; ++k) {
      const double r = 6.0 * k / 4000.0;
      CHECK(std::abs(m.J_radial(r)) * (1 + r * r) <= m.psi(r) + 1e-15);
      if (k) CHECK(m.psi(r) <= m.psi(6.0 * (k - 1) / 4000.0));
    }
    double last = m.tail_constant(0.0);
    for (double R = 0.25; R <= 6.0; R += 0.25) {
      const double t = m.tail_constant(R);
      CHECK(t <= last);
      last = t;
    }
    const double psi_s = oracle::simpson([&](double r) { return m.psi(r) * r; }, 0.0, 12.0, 48000);
    CHECK(m.psi_s() >= psi_s - 1e-6);
  }
}

TEST_CASE("compact tables give a zero tail beyond the support") {
  const auto m = PairPotentialModel::load(kData / "compact_triangle.model");
  CHECK(m.kind() == ModelKind::custom_table);
  CHECK(m.J_radial(1.0) == doctest::Approx(0.5));
  CHECK(m.J_radial(1.35) == doctest::Approx(0.25));
  CHECK(m.J_radial(1.6) == 0.0);
  CHECK(m.tail_constant(1.5) == 0.0);
  CHECK(m.V(0.0) == doctest::Approx(-1.0));
  CHECK(m.V(std::numbers::pi) == doctest::Approx(1.0));
  const double direct = oracle::simpson([&](double r) { return 8.0 * r * m.J_radial(r) * (1 + r * r); }, 0.0, 1.2, 2000) +
                        oracle::simpson([&](double r) { return 8.0 * r * m.J_radial(r) * (1 + r * r); }, 1.2, 1.5, 2000);
  CHECK(m.c_J() >= 1.0 + m.psi(0.0) + direct);
}

TEST_CASE("superstability on random packings") {
  const auto m = PairPotentialModel::reference();
  CHECK(superstability_margin(m, Configuration{}) == 0.0);
  CHECK(superstability_margin(m, Configuration({{{0.0, 0.0}, Spin{}}})) ==
        doctest::Approx(m.superstability_B() - m.superstability_A()));
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    Configuration cfg = random_packing(rng, 1.5 + rng.uniform(0.0, 2.0), rng.uniform(1.0, 40.0), 0.2);
    // Align spins on a fraction of trials: the ferromagnetic ground state is the hardest case.
    if (trial % 2) {
      std::vector<MarkedParticle> ps(cfg.begin(), cfg.end());
      for (auto& p : ps) p.spin = Spin{};
      cfg = Configuration(ps);
    }
    CHECK(superstability_margin(m, cfg) >= 0.0);
  }
}

TEST_CASE("lower regularity on random pairs of packings") {
  const auto m = PairPotentialModel::reference();
  CHECK(lower_regularity_margin(m, Configuration({{{0.0, 0.0}, Spin{}}}), Configuration{}) == 0.0);
  const MarkedParticle a{{0.0, 0.0}, Spin{}}, b{{1.0, 0.0}, Spin{}};
  const double w = pair_energy(m, a, b).value();
  CHECK(lower_regularity_margin(m, Configuration({a}), Configuration({b})) ==
        doctest::Approx(w + m.lower_reg_Psi(1) * (0.5 + 0.5)));
  Rng rng(24);
  for (int trial = 0; trial < 300; ++trial) {
    const Configuration all = random_packing(rng, 3.0, rng.uniform(1.0, 30.0), 0.2);
    std::vector<MarkedParticle> left, right;
    for (const auto& p : all) (p.position.x < 0 ? left : right).push_back({p.position, Spin{}});
    CHECK(lower_regularity_margin(m, Configuration(left), Configuration(right)) >= 0.0);
  }
}

TEST_CASE("model files and key-value parsing") {
  const auto m = PairPotentialModel::load(kData / "desk.model");
  CHECK(m.j0() == 0.5);
  CHECK(m.hardcore_radius() == 0.2);
  const auto ideal = PairPotentialModel::load(kData / "ideal.model");
  CHECK_FALSE(ideal.interacting());
  CHECK(ideal.c_J() == doctest::Approx(1.0));
  CHECK_THROWS(KeyValueFile::parse("model.kind = magnet\n").get_double("model.kind", 0.0));
  CHECK_THROWS(PairPotentialModel::from_keyvalue(KeyValueFile::parse("model.kind = magnet\n")));
  const auto kv = KeyValueFile::parse("# comment\nmodel.j0 = 0.25\n\nmodel.hardcore_radius=0.3 # trailing\n");
  const auto m2 = PairPotentialModel::from_keyvalue(kv);
  CHECK(m2.j0() == 0.25);
  CHECK(m2.hardcore_radius() == 0.3);
}

TEST_CASE("extended energies saturate") {
  const ExtendedEnergy inf = ExtendedEnergy::infinity();
  CHECK((inf + ExtendedEnergy(-5.0)).is_infinite());
  CHECK(inf.boltzmann() == 0.0);
  CHECK(ExtendedEnergy(0.0).boltzmann() == 1.0);
  CHECK_THROWS_AS(ExtendedEnergy(-std::numeric_limits<double>::infinity()), std::domain_error);
}
