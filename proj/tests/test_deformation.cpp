#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gibbsym/bonds.hpp"
#include "gibbsym/deformation.hpp"
#include "gibbsym/rng.hpp"
#include "gibbsym/sampler.hpp"
#include "oracles.hpp"

using namespace gibbsym;

namespace {

double closed_Q(double k) { return k <= 2 ? k : 2 + std::log(std::log(k)) - std::log(std::log(2.0)); }

// q restricted to s > 2, where it is smooth; q jumps from 1 to 1/(2 log 2) at s = 2.
double q_tail(double s) { return 1.0 / (s * std::log(s)); }

Configuration random_config(Rng& rng, double half, double z) {
  return hardcore_thin(sample_poisson(Window(half), z, rng), 0.2);
}

}  // namespace

TEST_CASE("q, Q and taper examples") {
  CHECK(q(1.0) == 1.0);
  CHECK(q(2.0) == 1.0);
  CHECK(q(-3.0) == 1.0);
  CHECK(q(std::numbers::e) == doctest::Approx(1 / std::numbers::e).epsilon(1e-15));
  CHECK(Q(0.0) == 0.0);
  CHECK(Q(2.0) == 2.0);
  // 2 + log log 10 - log log 2 = 2 + 0.83403 + 0.36651.
  CHECK(Q(10.0) == doctest::Approx(3.20055).epsilon(1e-5));
  CHECK(Q(4.0) == doctest::Approx(2.69315).epsilon(1e-5));
  CHECK_THROWS(Q(-0.1));
  CHECK(taper(-1.0, 5.0) == 1.0);
  CHECK(taper(5.0, 5.0) == 0.0);
  CHECK(taper(7.0, 5.0) == 0.0);
  CHECK(taper(1.0, 4.0) == doctest::Approx((closed_Q(4) - 1) / closed_Q(4)).epsilon(1e-14));
  CHECK(taper(1.0, 4.0) == doctest::Approx(0.62869).epsilon(1e-4));
  CHECK_THROWS(taper(1.0, 0.0));
  const TaperParams p{1.0, 2, 10, 1};
  CHECK(tau_n({3.0, -1.0}, p) == doctest::Approx((closed_Q(8) - 1) / closed_Q(8)).epsilon(1e-14));
  CHECK(tau_n({3.0, -1.0}, p) == doctest::Approx(0.67727).epsilon(1e-4));
  CHECK(tau_n({-2.0, 1.0}, p) == 1.0);
  CHECK(tau_n({0.0, 10.0}, p) == 0.0);
  CHECK_THROWS((TaperParams{0.5, 2, 2, 1}.validate()));
  CHECK_THROWS((TaperParams{0.5, 2, 5, 2}.validate()));
  CHECK_THROWS((TaperParams{4.0, 3, 8, 1}.validate()));
  CHECK_NOTHROW((TaperParams{0.5, 3, 8, 1}.validate()));
}

TEST_CASE("Q closed form against quadrature of q") {
  double worst = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double k = 0.25 * i;
    double numeric = oracle::simpson([](double s) { return q(s); }, 0.0, std::min(k, 2.0), 200);
    if (k > 2) numeric += oracle::simpson(q_tail, 2.0, k, 20000);
    worst = std::max(worst, std::abs(numeric - Q(k)));
    CHECK(Q(k) == doctest::Approx(closed_Q(k)).epsilon(1e-14));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("taper Lipschitz bound and plateaus") {
  Rng rng(6);
  std::size_t violations = 0;
  for (int k = 0; k < 100000; ++k) {
    const int R = 2 + static_cast<int>(rng.index(5));
    const int n = R + 1 + static_cast<int>(rng.index(30));
    const TaperParams p{rng.uniform(0.01, 3.1), R, n, 1};
    const double range = n + 2.0;
    Point a{rng.uniform(-range, range), rng.uniform(-range, range)};
    Point b{rng.uniform(-range, range), rng.uniform(-range, range)};
    if (k % 2 == 0) b = a + Point{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    if (norm(b) < norm(a)) std::swap(a, b);
    const double diff = tau_n(a, p) - tau_n(b, p);
    const double bound = p.tau * norm(a - b) * q(norm(a) - R) / Q(n - R);
    if (!(diff >= 0.0) || !(diff <= bound * (1 + 1e-12) + 1e-15)) ++violations;
    if (norm(a) <= R && tau_n(a, p) != p.tau) ++violations;
    if (norm(b) >= n && tau_n(b, p) != 0.0) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("taper square integral and its bound") {
  for (int R = 2; R <= 6; ++R)
    for (int n = R + 1; n <= 40; ++n) {
      CAPTURE(R);
      CAPTURE(n);
      // Level sets of the sup norm are squares of perimeter 8r.
      double oracle_value = oracle::simpson([](double r) { return 8 * r; }, 0.0, std::min<double>(n, R + 2), 2);
      if (n > R + 2)
        oracle_value += oracle::simpson([R](double r) { return 8 * r * q_tail(r - R) * q_tail(r - R); }, R + 2, n, 20000);
      const double quad = taper_square_integral(R, n);
      CHECK(quad == doctest::Approx(oracle_value).epsilon(1e-9));
      CHECK(quad <= taper_square_bound(R, n));
      CHECK(taper_square_bound(R, n) == doctest::Approx(8.0 * (R + 3) * (R + 3) + 8.0 * R * closed_Q(n - R)));
    }
}

TEST_CASE("cluster taper") {
  const TaperParams p{1.0, 2, 10, 1};
  const Configuration cfg({{{3.0, 0.0}, Spin{}}, {{0.0, 5.0}, Spin{}}, {{1.0, 1.0}, Spin{}}, {{0.0, -11.0}, Spin{}},
                           {{0.5, 0.0}, Spin{}}, {{-5.0, 0.0}, Spin{}}});
  const auto single = cluster_taper(cfg, clusters(cfg, std::vector<Bond>{}), p);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    CHECK(single.angle[i] == tau_n(cfg[i].position, p));
    CHECK(single.witness[i] == i);
  }
  const auto cl = clusters(cfg, std::vector<Bond>{{0, 1}, {2, 3}, {1, 5}});
  const auto f = cluster_taper(cfg, cl, p);
  CHECK(f.angle[0] == tau_n({0.0, 5.0}, p));
  CHECK(f.angle[1] == f.angle[0]);
  CHECK(f.angle[5] == f.angle[0]);
  // Norm tie between particles 1 and 5 goes to the smaller id.
  CHECK(f.witness[0] == 1);
  CHECK(f.witness[5] == 1);
  CHECK(f.angle[2] == 0.0);
  CHECK(f.witness[2] == 3);
  CHECK(f.angle[4] == 1.0);
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng, 8.0, 0.3);
    std::vector<Bond> bonds;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const auto a = rng.index(c.size()), b = rng.index(c.size());
      if (a != b) bonds.push_back(make_bond(a, b));
    }
    const TaperParams tp{0.7, 3, 7, 1};
    const auto d = clusters(c, bonds);
    const auto field = cluster_taper(c, d, tp);
    for (std::size_t i = 0; i < c.size(); ++i) {
      double mn = tp.tau;
      for (auto j : d.members[d.label[i]]) mn = std::min(mn, tau_n(c[j].position, tp));
      CHECK(field.angle[i] == mn);
      CHECK(norm(c[field.witness[i]].position) >= norm(c[i].position));
      CHECK(d.label[field.witness[i]] == d.label[i]);
    }
  }
}

TEST_CASE("dirichlet energy") {
  const auto model = PairPotentialModel::reference(0.5);
  const Configuration cfg({{{0.0, 0.0}, Spin{}}, {{0.0, 0.0 + 1e-9}, Spin{}}});
  BondSet one;
  one.bonds = {Bond{0, 1}};
  DeformationField f{{1.0, 0.0}, {0, 1}};
  CHECK(dirichlet_energy(cfg, model, one, f) == doctest::Approx(0.5).epsilon(1e-12));
  DeformationField constant{{0.3, 0.3}, {0, 1}};
  CHECK(dirichlet_energy(cfg, model, one, constant) == 0.0);
  // Negative couplings count with their modulus.
  CHECK(dirichlet_energy(cfg, PairPotentialModel::reference(-0.5), one, f) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dirichlet energy decreases as the taper widens") {
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.114);
  const int R = 2;
  std::vector<double> medians;
  for (int n : {2 * R, 4 * R, 8 * R}) {
    std::vector<double> energies;
    for (int r = 0; r < 15; ++r) {
      Rng rng(derive_seed(55, r));
      const auto cfg = random_config(rng, n + model.interaction_cutoff(), 0.6);
      const auto bonds = sample_bonds(cfg, model, split, n, derive_seed(56, r));
      const TaperParams p{0.35, R, n, 1};
      const auto field = cluster_taper(cfg, clusters(cfg, bonds.present_set()), p);
      energies.push_back(dirichlet_energy(cfg, model, bond_set(cfg, model, n), field));
    }
    std::nth_element(energies.begin(), energies.begin() + 7, energies.end());
    medians.push_back(energies[7]);
  }
  MESSAGE("medians " << medians[0] << " " << medians[1] << " " << medians[2]);
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("deformation round trip and global rotation") {
  Rng rng(1);
  const auto cfg = random_config(rng, 5.0, 0.6);
  DeformationField f;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    f.angle.push_back(rng.uniform(0.0, 3.0));
    f.witness.push_back(i);
  }
  const auto there = apply_deformation(cfg, f, 1);
  CHECK(apply_deformation(there, f, -1) == cfg);
  for (std::size_t i = 0; i < cfg.size(); ++i) CHECK(there[i].position == cfg[i].position);
  DeformationField zero{std::vector<double>(cfg.size(), 0.0), f.witness};
  CHECK(apply_deformation(cfg, zero, 1) == cfg);
}

TEST_CASE("Taylor margin examples and good instances") {
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.114);
  Rng rng(71);
  const auto cfg = random_config(rng, 6.0, 0.6);
  const auto pairs = bond_set(cfg, model, 5.0);
  const DeformationField zero{std::vector<double>(cfg.size(), 0.0), std::vector<std::size_t>(cfg.size(), 0)};
  const auto m0 = taylor_margin(cfg, model, split, pairs, zero);
  CHECK(m0.margin == doctest::Approx(std::numbers::e - 1).epsilon(1e-12));
  const DeformationField constant{std::vector<double>(cfg.size(), 0.4), zero.witness};
  const auto mc = taylor_margin(cfg, model, split, pairs, constant);
  CHECK(mc.margin == doctest::Approx(std::numbers::e - 1).epsilon(1e-9));
  CHECK(std::abs(mc.second_difference) <= 1e-9);

  const TaperParams p{0.35, 2, 5, 1};
  std::size_t good = 0, violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng r(derive_seed(72, trial));
    const auto c = random_config(r, 6.0, 0.6);
    const auto bonds = sample_bonds(c, model, split, p.n, derive_seed(73, trial));
    const auto open = bonds.present_set();
    const auto verdict = good_set_verdict(c, model, split, open.bonds, p);
    const auto cl = clusters(c, open);
    const auto field = cluster_taper(c, cl, p);
    const auto E = bond_set(c, model, p.n);
    // Hand evaluation of both clauses.
    CHECK(verdict.range == cluster_range(c, cl, Window(p.n_prime)));
    CHECK(verdict.energy == doctest::Approx(dirichlet_energy(c, model, E, field)).epsilon(1e-12));
    CHECK(verdict.threshold == doctest::Approx(2.0 / vbar_second_bound(split)));
    CHECK(verdict.range_ok == (verdict.range < p.R));
    CHECK(verdict.energy_ok == (verdict.energy < verdict.threshold));
    CHECK(verdict.is_good == (verdict.range_ok && verdict.energy_ok));
    if (!verdict.is_good) continue;
    ++good;
    const auto t = taylor_margin(c, model, split, E, field);
    if (!(t.margin >= 0.0) || !t.bound_ok()) ++violations;
    CHECK(t.bound == doctest::Approx(vbar_second_bound(split) * verdict.energy));
  }
  MESSAGE(good << " good instances");
  CHECK(good > 100);
  CHECK(violations == 0);
}
