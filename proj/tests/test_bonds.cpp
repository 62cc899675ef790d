#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "gibbsym/bonds.hpp"
#include "gibbsym/rng.hpp"
#include "gibbsym/sampler.hpp"
#include "gibbsym/smoothing.hpp"
#include "oracles.hpp"

using namespace gibbsym;

namespace {

const std::filesystem::path kData = GIBBSYM_DATA_DIR;

Configuration random_config(Rng& rng, std::size_t count, double half) {
  std::vector<MarkedParticle> ps;
  for (std::size_t k = 0; k < count; ++k)
    ps.push_back({{rng.uniform(-half, half), rng.uniform(-half, half)}, Spin::from_angle(rng.uniform(0.0, kTwoPi))});
  return Configuration(ps);
}

// A coupling that is a pure rescaling of the reference one but negative.
PairPotentialModel antiferro() { return PairPotentialModel::reference(-0.5); }

}  // namespace

TEST_CASE("bond set equals the brute-force predicate") {
  const auto compact = PairPotentialModel::load(kData / "compact_triangle.model");
  CHECK_THROWS(make_bond(3, 3));
  CHECK(make_bond(5, 2) == Bond{2, 5});
  Rng rng(4);
  for (const auto* model : {&compact}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto cfg = random_config(rng, 8, 3.0);
      for (double n : {0.5, 1.0, 2.0, 4.0}) {
        const auto bs = bond_set(cfg, *model, n);
        std::vector<std::pair<std::size_t, std::size_t>> got;
        for (const auto& b : bs.bonds) got.push_back({b.i, b.j});
        std::sort(got.begin(), got.end());
        CHECK(got == oracle::brute_bond_set(cfg, *model, n));
      }
    }
  }
  const auto ref = PairPotentialModel::reference();
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = random_config(rng, 30, 8.0);
    const auto bs = bond_set(cfg, ref, 3.0);
    std::vector<std::pair<std::size_t, std::size_t>> got;
    for (const auto& b : bs.bonds) got.push_back({b.i, b.j});
    std::sort(got.begin(), got.end());
    CHECK(got == oracle::brute_bond_set(cfg, ref, 3.0));
  }
  // Both endpoints outside the window, and a pair beyond a compact support.
  const Configuration outside({{{5.0, 5.0}, Spin{}}, {{5.3, 5.0}, Spin{}}});
  CHECK(bond_set(outside, ref, 2.0).size() == 0);
  const Configuration far({{{0.0, 0.0}, Spin{}}, {{1.6, 0.0}, Spin{}}});
  CHECK(bond_set(far, compact, 2.0).size() == 0);
  const Configuration near({{{0.0, 0.0}, Spin{}}, {{1.4, 0.0}, Spin{}}});
  CHECK(bond_set(near, compact, 2.0).size() == 1);
}

TEST_CASE("conditional bond probability") {
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.1);
  const MarkedParticle a{{0.0, 0.0}, Spin::from_angle(0.0)};
  const MarkedParticle b{{0.0, 0.0}, Spin::from_angle(1.3)};
  const MarkedParticle b_shift{{0.5, 0.0}, Spin::from_angle(1.3)};
  // At zero separation J = 0.5, so p = 1 - exp(-0.5 v).
  const double v = split.plus.v(1.3);
  CHECK(conditional_bond_probability(model, split, a, b_shift) ==
        doctest::Approx(-std::expm1(-0.5 * std::exp(-0.25) * v)).epsilon(1e-14));
  CHECK(conditional_bond_probability(model, split, a, b) == doctest::Approx(-std::expm1(-0.5 * v)).epsilon(1e-14));
  CHECK(-std::expm1(-0.5 * 0.1) == doctest::Approx(0.048771).epsilon(1e-5));
  CHECK_THROWS(conditional_bond_probability(antiferro(), split.plus, a, b_shift));
  CHECK_THROWS(conditional_bond_probability(model, split.minus, a, b_shift));
  const double pm = conditional_bond_probability(antiferro(), split, a, b_shift);
  CHECK(pm == doctest::Approx(-std::expm1(-0.5 * std::exp(-0.25) * split.minus.v(1.3))).epsilon(1e-14));
  CHECK(conditional_bond_probability(PairPotentialModel::ideal_gas(), split, a, b_shift) == 0.0);
}

TEST_CASE("expansion identity") {
  CHECK(expansion_identity_check({}) == 0.0);
  const std::vector<double> two{0.3, -0.1};
  CHECK(expansion_identity_check(two) <= 1e-12);
  Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> w(12);
    for (double& x : w) x = rng.uniform(0.0, 0.2);
    CHECK(expansion_identity_check(w) <= 1e-10);
  }
  CHECK_THROWS(expansion_identity_check(std::vector<double>(21, 0.1)));
}

TEST_CASE("pointwise domination on random draws") {
  const double eps = 0.114;
  Rng rng(8);
  std::size_t violations = 0;
  for (const auto& model : {PairPotentialModel::reference(0.5), antiferro(),
                            PairPotentialModel::load(kData / "compact_triangle.model")}) {
    const auto split = sign_split_decompose(model.V_function(), eps);
    for (int k = 0; k < 100000 / 3; ++k) {
      const MarkedParticle a{{0.0, 0.0}, Spin::from_angle(rng.uniform(0.0, kTwoPi))};
      const MarkedParticle b{{rng.uniform(0.2, 2.0), rng.uniform(-0.2, 0.2)}, Spin::from_angle(rng.uniform(0.0, kTwoPi))};
      if (model.J(b.position - a.position) == 0.0) continue;
      const double p = conditional_bond_probability(model, split, a, b);
      const double q = bernoulli_probability(model, eps, a, b);
      if (!(p <= q) || !(p >= 0.0)) ++violations;
    }
  }
  CHECK(violations == 0);
  const auto model = PairPotentialModel::reference(0.5);
  CHECK(bernoulli_probability(model, eps, {{0, 0}, Spin{}}, {{0.3, 0}, Spin{}}) == doctest::Approx(0.5 * std::exp(-0.09) * eps));
  CHECK(bernoulli_probability(PairPotentialModel::ideal_gas(), eps, {{0, 0}, Spin{}}, {{0.3, 0}, Spin{}}) == 0.0);
  CHECK_THROWS(bernoulli_probability(PairPotentialModel::reference(3.0), 0.5, {{0, 0}, Spin{}}, {{0.25, 0}, Spin{}}));
}

TEST_CASE("Holley bracket") {
  CHECK(holley_bracket(1.0, 0.7) == doctest::Approx(1.0));
  CHECK(holley_bracket(0.5, 0.3) == doctest::Approx(0.5 - 0.5 * std::expm1(0.3)).epsilon(1e-14));
  CHECK(holley_bracket(0.5, 0.3) == doctest::Approx(0.325).epsilon(1e-3));
  for (int k = 1; k <= 1000; ++k) {
    const double e = k / 1000.0;
    CHECK(holley_bracket(e, e) >= 0.0);
  }
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.114);
  CHECK(holley_single_bond_check(model, split.plus, 0.114, {0, 0}, {0.3, 0.1}, 512));
}

TEST_CASE("exhaustive domination") {
  const std::vector<double> eps{0.2, 0.4};
  std::vector<double> bern(4);
  for (unsigned m = 0; m < 4; ++m) bern[m] = ((m & 1) ? 0.2 : 0.8) * ((m & 2) ? 0.4 : 0.6);
  const auto same = exhaustive_domination_check(bern, eps);
  CHECK(same.ok);
  CHECK(same.min_slack == doctest::Approx(0.0).scale(1.0));
  const std::vector<double> empty_mass{1.0, 0.0, 0.0, 0.0};
  CHECK(exhaustive_domination_check(empty_mass, eps).ok);
  // Up-sets of the 2-element lattice: {}, {11}, {01,11}, {10,11}, {01,10,11}, all.
  CHECK(exhaustive_domination_check(empty_mass, eps).upsets_checked == 6);
  const std::vector<double> full_mass{0.0, 0.0, 0.0, 1.0};
  CHECK_FALSE(exhaustive_domination_check(full_mass, eps).ok);
  CHECK_THROWS(exhaustive_domination_check(std::vector<double>{0.5, 0.1, 0.1, 0.1}, eps));

  const auto model = PairPotentialModel::reference(0.5);
  const double e = 0.114;
  const auto split = sign_split_decompose(model.V_function(), e);
  const auto law = tiny_bond_law(model, split, e, Window(0.5), {{-0.2, 0.0}, {0.2, 0.1}}, Configuration{}, 64);
  REQUIRE(law.bonds.size() == 1);
  const auto r = exhaustive_domination_check(law.pi, law.eps);
  CHECK(r.ok);
  // The only nontrivial up-set is {bond open}; there the inequality is strict.
  CHECK(law.pi[1] < law.eps[0]);
  CHECK(law.pi[0] + law.pi[1] == doctest::Approx(1.0).epsilon(1e-12));
  const auto law3 = tiny_bond_law(model, split, e, Window(0.5), {{-0.3, -0.2}, {0.3, 0.0}, {0.0, 0.35}},
                                  Configuration{}, 24);
  CHECK(law3.bonds.size() == 3);
  CHECK(exhaustive_domination_check(law3.pi, law3.eps).ok);
}

TEST_CASE("clusters agree with breadth-first search") {
  Rng rng(21);
  CHECK(clusters(Configuration({{{0, 0}, Spin{}}, {{1, 0}, Spin{}}}), std::vector<Bond>{}).count() == 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<MarkedParticle> ps(n);
    for (std::size_t i = 0; i < n; ++i) ps[i].position = {static_cast<double>(i), 0.5 * static_cast<double>(i % 3)};
    const Configuration cfg(ps);
    std::vector<Bond> bonds;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    const std::size_t m = n < 2 ? 0 : rng.index(2 * n);
    for (std::size_t k = 0; k < m; ++k) {
      const auto a = rng.index(n), b = rng.index(n);
      if (a == b) continue;
      bonds.push_back(make_bond(a, b));
      edges.push_back({a, b});
    }
    const auto cl = clusters(cfg, bonds);
    const auto bfs = oracle::bfs_labels(n, edges);
    bool same = true;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) same = same && ((cl.label[a] == cl.label[b]) == (bfs[a] == bfs[b]));
    CHECK(same);
    std::size_t total = 0;
    for (std::size_t c = 0; c < cl.count(); ++c) {
      total += cl.members[c].size();
      double mx = 0.0;
      for (auto id : cl.members[c]) {
        CHECK(cl.label[id] == c);
        mx = std::max(mx, norm(cfg[id].position));
      }
      CHECK(cl.max_norm[c] == mx);
    }
    CHECK(total == n);
  }
  CHECK_THROWS(clusters(Configuration({{{0, 0}, Spin{}}}), std::vector<Bond>{Bond{0, 1}}));
}

TEST_CASE("cluster range") {
  const Configuration cfg({{{1.0, 0.0}, Spin{}}, {{7.0, 0.0}, Spin{}}, {{0.5, 0.2}, Spin{}}, {{9.0, 9.0}, Spin{}}});
  const auto none = clusters(cfg, std::vector<Bond>{});
  CHECK(cluster_range(cfg, none, Window(0.1)) == 0.0);
  CHECK(cluster_range(cfg, none, Window(0.8)) == 0.5);
  const auto paired = clusters(cfg, std::vector<Bond>{{0, 1}});
  CHECK(cluster_range(cfg, paired, Window(1.5)) == 7.0);
  CHECK(cluster_range(cfg, paired, Window(0.8)) == 0.5);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng, 12, 4.0);
    std::vector<Bond> bonds;
    for (int k = 0; k < 6; ++k) {
      const auto a = rng.index(12), b = rng.index(12);
      if (a != b) bonds.push_back(make_bond(a, b));
    }
    const auto cl = clusters(c, bonds);
    const Window w(2.0);
    const double r = cluster_range(c, cl, w);
    for (const auto& p : c)
      if (w.contains(p.position)) CHECK(r >= norm(p.position));
  }
}

TEST_CASE("chain bound dominates the exact connection probability") {
  const auto compact = PairPotentialModel::load(kData / "compact_triangle.model");
  const double eps = 0.3;
  CHECK(chain_bound(Configuration({{{0, 0}, Spin{}}, {{1, 0}, Spin{}}}), PairPotentialModel::ideal_gas(), eps, 0, 1, 5).total() == 0.0);
  const Configuration pair({{{0, 0}, Spin{}}, {{1.3, 0}, Spin{}}});
  const auto direct = chain_bound(pair, compact, eps, 0, 1, 5);
  CHECK(direct.exact);
  CHECK(direct.total() == doctest::Approx(eps * compact.J_radial(1.3)).epsilon(1e-14));

  Rng rng(17);
  std::size_t instances = 0, violations = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 3 + rng.index(4);
    const auto cfg = random_config(rng, n, 1.2);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<double> p;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double J = compact.J(cfg[i].position - cfg[j].position);
        if (J == 0.0) continue;
        edges.push_back({i, j});
        p.push_back(std::abs(J) * eps);
      }
    if (edges.size() > 10) continue;
    ++instances;
    for (std::size_t b = 1; b < n; ++b) {
      const double exact = oracle::connection_probability(n, edges, p, 0, b);
      const auto bound = chain_bound(cfg, compact, eps, 0, b, n);
      CHECK(bound.exact);
      if (!(bound.total() >= exact - 1e-15)) ++violations;
      const auto short_bound = chain_bound(cfg, compact, eps, 0, b, 1);
      if (!(short_bound.total() >= exact - 1e-15)) ++violations;
    }
  }
  MESSAGE(instances << " instances");
  CHECK(instances > 1000);
  CHECK(violations == 0);
}

TEST_CASE("path length inequality") {
  Rng rng(99);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const int m = 1 + static_cast<int>(rng.index(10));
    const double scale = std::pow(10.0, rng.uniform(-2.0, 1.5));
    Point x{0.0, 0.0};
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
      const Point step{rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
      x = x + step;
      prod *= norm(step) * norm(step) + 1.0;
    }
    if (!(norm(x) * norm(x) <= m * prod)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("bond sampling") {
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.114);
  Rng rng(3);
  const auto cfg = hardcore_thin(random_config(rng, 60, 3.0), 0.2);
  const auto a = sample_bonds(cfg, model, split, 2.0, 5);
  const auto b = sample_bonds(cfg, model, split, 2.0, 5);
  CHECK(a.present == b.present);
  CHECK(a.bonds == bond_set(cfg, model, 2.0).bonds);
  for (std::size_t k = 0; k < a.bonds.size(); ++k)
    CHECK(a.probability[k] == conditional_bond_probability(model, split, cfg[a.bonds[k].i], cfg[a.bonds[k].j]));
  // Empirical inclusion frequencies match the conditional probabilities.
  std::vector<double> freq(a.bonds.size(), 0.0);
  const int runs = 4000;
  for (int s = 0; s < runs; ++s) {
    const auto x = sample_bonds(cfg, model, split, 2.0, derive_seed(1, s));
    for (std::size_t k = 0; k < freq.size(); ++k) freq[k] += x.present[k];
  }
  for (std::size_t k = 0; k < freq.size(); ++k) {
    const double p = a.probability[k];
    // Counts, with a few events of slack for bonds whose expected count is far below one.
    CHECK(std::abs(freq[k] - p * runs) <= 5 * std::sqrt(p * (1 - p) * runs) + 3);
  }
  std::size_t present = 0;
  for (bool x : a.present) present += x;
  CHECK(a.present_set().size() == present);
}

TEST_CASE("decomposition identity on tiny systems") {
  const auto model = PairPotentialModel::reference(0.5);
  const auto split = sign_split_decompose(model.V_function(), 0.114);
  const Window w(0.3);
  const Configuration boundary({{{0.4, 0.0}, Spin::from_angle(0.0)}});
  const std::vector<TinyEvent> events{
      {"everything", [](const Configuration&) { return true; }},
      {"empty", [](const Configuration& c) { return c.empty(); }},
      {"half-circle",
       [](const Configuration& c) { return c.size() == 1 && std::sin(c[0].spin.angle()) > 0.0; }},
      {"aligned-pair",
       [](const Configuration& c) { return c.size() == 2 && std::cos(c[0].spin.angle() - c[1].spin.angle()) > 0.0; }}};
  const auto r = decomposition_identity_check(model, split, w, boundary, 0.02, events);
  CHECK(r.max_discrepancy <= 1e-6);
  REQUIRE(r.events.size() == 4);
  CHECK(r.events[0].second.first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.events[0].second.second == doctest::Approx(1.0).epsilon(1e-12));
  // The empty configuration has Poisson-like mass for such a small activity.
  CHECK(r.events[1].second.first > 0.9);
  CHECK(r.events[2].second.first > 0.0);
  CHECK_THROWS(decomposition_identity_check(model, split, Window(2.0), boundary, 1.0, events));
}
