#include "gibbsym/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gibbsym/bonds.hpp"
#include "gibbsym/rng.hpp"
#include "gibbsym/smoothing.hpp"
#include "gibbsym/worker_pool.hpp"

namespace gibbsym {

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    if constexpr (std::is_same_v<T, int>) {
      out.push_back(std::stoi(item, &used));
    } else {
      out.push_back(std::stod(item, &used));
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("bad list entry '" + item + "'");
  }
  return out;
}

std::size_t get_count(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
  const long long v = kv.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw std::invalid_argument(key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Runs `body`; a thrown exception becomes a failed entry with the message.
template <class Body>
void run_check(Report& report, const std::string& name, Body&& body) {
  Stopwatch clock;
  CheckResult c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c = CheckResult{};
    c.pass = false;
    c.details["error"] = e.what();
  }
  c.name = name;
  c.runtime_s = clock.seconds();
  report.add(std::move(c));
}

CheckResult compare(double statistic, const std::string& op, double threshold) {
  CheckResult c;
  c.statistic = statistic;
  c.threshold = threshold;
  c.comparison = op;
  if (op == "<=") c.pass = statistic <= threshold;
  else if (op == ">=") c.pass = statistic >= threshold;
  else if (op == "<") c.pass = statistic < threshold;
  else if (op == ">") c.pass = statistic > threshold;
  else throw std::logic_error("unknown comparison " + op);
  return c;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double standard_error(const std::vector<double>& x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

Report new_report(const ExperimentPlan& plan, const std::string& suite) {
  Report r;
  r.suite = suite;
  r.seed = plan.seed;
  r.plan = plan.to_json();
  r.timestamp = utc_timestamp();
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string replicate_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "replicate_%03zu.csv", r);
  return buf;
}

}  // namespace

double ExperimentPlan::default_epsilon(const PairPotentialModel& model, double z, double xi) {
  return 0.9 / (2.0 * model.c_J() * z * xi);
}

void ExperimentPlan::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("plan: " + m); };
  if (n_prime < 1) fail("n_prime must be at least 1");
  if (!(R > n_prime)) fail("R must exceed n_prime");
  if (!(n > R)) fail("n must exceed R");
  if (!(tau > 0.0 && tau < std::numbers::pi)) fail("tau must lie in (0, pi)");
  if (!(z > 0.0)) fail("z must be positive");
  if (!(xi > 0.0)) fail("xi must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (!(bond_epsilon > 0.0 && bond_epsilon <= 1.0)) fail("bond epsilon must lie in (0, 1]");
  const double cj = model.c_J();
  if (!(cj * bond_epsilon < 2.0 * cj * z * xi * bond_epsilon && 2.0 * cj * z * xi * bond_epsilon < 1.0)) {
    std::ostringstream m;
    m << "epsilon condition c_J eps < 2 c_J z xi eps < 1 fails (c_J=" << cj << ", z=" << z << ", xi=" << xi
      << ", eps=" << bond_epsilon << ")";
    fail(m.str());
  }
  if (!(delta > 0.0)) fail("delta must be positive");
  if (replicates == 0) fail("replicates must be positive");
  if (sample_every == 0) fail("sampler.sample_every must be positive");
  if (bond_samples == 0) fail("bond_samples must be positive");
  if (boundary != "aligned" && boundary != "random" && boundary != "empty") fail("boundary must be aligned, random or empty");
  if (symmetry_sizes.empty()) fail("symmetry.sizes is empty");
  for (int s : symmetry_sizes)
    if (s <= n_prime) fail("symmetry sizes must exceed n_prime");
  for (std::size_t i = 1; i < symmetry_sizes.size(); ++i)
    if (symmetry_sizes[i] <= symmetry_sizes[i - 1]) fail("symmetry.sizes must increase");
  if (symmetry_replicates == 0) fail("symmetry.replicates must be positive");
  sampler.validate();
}

nlohmann::ordered_json ExperimentPlan::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model.name();
  j["model_path"] = model_path.string();
  j["n"] = n;
  j["n_prime"] = n_prime;
  j["R"] = R;
  j["tau"] = tau;
  j["z"] = z;
  j["xi"] = xi;
  j["epsilon"] = epsilon;
  j["bond_epsilon"] = bond_epsilon;
  j["c_J"] = model.c_J();
  j["delta"] = delta;
  j["replicates"] = replicates;
  j["sweeps"] = sampler.sweeps;
  j["burn_in_fraction"] = sampler.burn_in_fraction;
  j["sample_every"] = sample_every;
  j["bond_samples"] = bond_samples;
  j["translate_scale"] = sampler.translate_scale;
  j["rotate_scale"] = sampler.rotate_scale;
  j["boundary"] = boundary;
  j["boundary_spin"] = boundary_spin;
  j["event"] = event;
  j["symmetry_sizes"] = symmetry_sizes;
  j["symmetry_taus"] = symmetry_taus;
  j["symmetry_replicates"] = symmetry_replicates;
  j["symmetry_sweeps"] = symmetry_sweeps;
  j["seed"] = seed;
  return j;
}

ExperimentPlan ExperimentPlan::from_keyvalue(const KeyValueFile& kv) {
  static const char* known[] = {
      "model", "n", "n_prime", "R", "tau", "z", "xi", "epsilon", "bond_epsilon", "delta", "replicates", "threads",
      "sampler.sweeps", "sampler.burn_in_fraction", "sampler.sample_every", "sampler.translate_scale",
      "sampler.rotate_scale", "sampler.steps_per_sweep", "bond_samples", "boundary", "boundary.spin", "event",
      "event.direction", "event.sector_lo", "event.sector_hi", "event.sector_min", "event.count_lo", "event.count_hi",
      "symmetry.sizes", "symmetry.taus", "symmetry.replicates", "symmetry.sweeps", "seed", "out"};
  for (const auto& [key, value] : kv.values()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("plan: unknown key '" + key + "'");
  }
  ExperimentPlan p;
  if (const auto path = kv.get_path("model")) {
    p.model_path = *path;
    p.model = PairPotentialModel::load(*path);
  }
  p.n = static_cast<int>(kv.get_int("n", p.n));
  p.n_prime = static_cast<int>(kv.get_int("n_prime", p.n_prime));
  p.R = static_cast<int>(kv.get_int("R", p.R));
  p.tau = kv.get_double("tau", p.tau);
  p.z = kv.get_double("z", p.z);
  p.xi = kv.get_double("xi", p.xi);
  p.epsilon = kv.get_double("epsilon", default_epsilon(p.model, p.z, p.xi));
  p.bond_epsilon = kv.get_double("bond_epsilon", p.epsilon);
  p.delta = kv.get_double("delta", p.delta);
  p.replicates = get_count(kv, "replicates", p.replicates);
  p.threads = get_count(kv, "threads", p.threads);
  p.sampler.z = p.z;
  p.sampler.sweeps = get_count(kv, "sampler.sweeps", 400);
  p.sampler.burn_in_fraction = kv.get_double("sampler.burn_in_fraction", 0.25);
  p.sampler.translate_scale = kv.get_double("sampler.translate_scale", p.sampler.translate_scale);
  p.sampler.rotate_scale = kv.get_double("sampler.rotate_scale", p.sampler.rotate_scale);
  p.sampler.steps_per_sweep = get_count(kv, "sampler.steps_per_sweep", 0);
  p.sample_every = get_count(kv, "sampler.sample_every", p.sample_every);
  p.bond_samples = get_count(kv, "bond_samples", p.bond_samples);
  p.boundary = kv.get_string("boundary", p.boundary);
  p.boundary_spin = kv.get_double("boundary.spin", p.boundary_spin);
  p.event = kv.get_string("event", p.event);
  p.event_direction = kv.get_double("event.direction", p.event_direction);
  p.sector_lo = kv.get_double("event.sector_lo", p.sector_lo);
  p.sector_hi = kv.get_double("event.sector_hi", p.sector_hi);
  p.sector_min = static_cast<int>(kv.get_int("event.sector_min", p.sector_min));
  p.count_lo = static_cast<int>(kv.get_int("event.count_lo", p.count_lo));
  p.count_hi = static_cast<int>(kv.get_int("event.count_hi", p.count_hi));
  if (const auto s = kv.get("symmetry.sizes")) p.symmetry_sizes = parse_list<int>(*s);
  if (const auto s = kv.get("symmetry.taus")) p.symmetry_taus = parse_list<double>(*s);
  p.symmetry_replicates = get_count(kv, "symmetry.replicates", p.symmetry_replicates);
  p.symmetry_sweeps = get_count(kv, "symmetry.sweeps", p.symmetry_sweeps);
  p.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(p.seed)));
  p.sampler.seed = p.seed;
  if (const auto out = kv.get_path("out")) p.out_dir = *out;
  p.validate();
  return p;
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::load(path));
}

TestEvent make_event(const ExperimentPlan& plan, const std::string& name) {
  const double np = plan.n_prime;
  if (name == "sector") return spin_sector_event(np, plan.sector_lo, plan.sector_hi, plan.sector_min);
  if (name == "count-band") return count_band_event(np, plan.count_lo, plan.count_hi);
  if (name == "half-plane") return half_plane_event(np, plan.event_direction);
  if (name == "full") return full_event(np);
  if (name == "impossible") return empty_event(np);
  throw std::invalid_argument("unknown event '" + name + "' (sector, count-band, half-plane, full, impossible)");
}

Configuration make_boundary(const ExperimentPlan& plan, const PairPotentialModel& model, int n, std::uint64_t seed) {
  if (plan.boundary == "empty") return {};
  const double reach = std::max(model.interaction_cutoff(), 1.0);
  Rng rng(seed);
  std::optional<Spin> spin;
  if (plan.boundary == "aligned") spin = Spin::from_angle(plan.boundary_spin);
  const Configuration outer = sample_poisson(Window(n + reach), plan.z, rng, spin);
  return hardcore_thin(restrict_outside(outer, Window(n)), model.hardcore_radius());
}

std::vector<Configuration> replicate_samples(const ExperimentPlan& plan, const PairPotentialModel& model, int n,
                                             const Configuration& boundary, std::size_t sweeps, std::uint64_t seed,
                                             Spin frame) {
  SamplerParams params = plan.sampler;
  params.z = plan.z;
  params.sweeps = sweeps;
  params.seed = seed;
  params.spin_frame = frame;
  std::vector<Configuration> out;
  run_chain(model, Window(n), boundary, Configuration{}, params, [&](std::size_t sweep, const GibbsChain& chain) {
    if (sweep % plan.sample_every == 0) out.push_back(concatenate(chain.inside(), boundary));
  });
  return out;
}

namespace {

// Per-instance quantities gathered by the lemma suite for one replicate.
struct ReplicateStats {
  std::size_t instances = 0;
  std::size_t bonds_checked = 0;
  std::size_t pointwise_violations = 0;
  std::size_t range_exceed = 0;
  std::size_t energy_exceed = 0;
  std::size_t good = 0;
  std::size_t taylor_violations = 0;
  std::size_t second_difference_violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_energy = 0.0;
  double max_range = 0.0;
  // For each candidate R: instances with range >= R and with energy >= threshold.
  std::vector<std::size_t> grid_range_exceed;
  std::vector<std::size_t> grid_energy_exceed;
};

std::vector<int> candidate_radii(const ExperimentPlan& plan) {
  std::vector<int> out;
  for (int r = plan.n_prime + 1; r < plan.n && r <= plan.n_prime + 8; ++r) out.push_back(r);
  return out;
}

struct TinySystem {
  std::string name;
  std::vector<Point> interior;
  std::vector<MarkedParticle> boundary;
};

std::vector<TinySystem> tiny_systems() {
  return {
      {"one-interior-one-boundary", {{0.1, 0.05}}, {{{0.8, 0.0}, Spin::from_angle(0.4)}}},
      {"two-interior", {{-0.2, 0.1}, {0.25, -0.1}}, {}},
      {"two-interior-one-boundary", {{-0.2, 0.1}, {0.25, -0.1}}, {{{0.9, 0.2}, Spin::from_angle(2.5)}}},
      {"three-interior", {{-0.3, -0.2}, {0.3, 0.0}, {0.0, 0.35}}, {}},
      {"one-interior-three-boundary",
       {{0.0, 0.0}},
       {{{0.7, 0.0}, Spin::from_angle(0.0)}, {{-0.7, 0.1}, Spin::from_angle(3.0)}, {{0.0, 0.75}, Spin::from_angle(1.2)}}},
  };
}

}  // namespace

namespace {

void add_domination_checks(Report& report, const ExperimentPlan& plan, const std::optional<SignSplitDecomposition>& split) {
  const PairPotentialModel& model = plan.model;
  auto need_split = [&]() -> const SignSplitDecomposition& {
    if (!split) throw std::runtime_error("smooth decomposition unavailable");
    return *split;
  };
  run_check(report, "domination.holley_bracket", [&] {
    const auto& s = need_split();
    std::size_t failures = 0, pairs = 0;
    const double reach = std::max(model.interaction_cutoff(), 1e-9);
    for (int k = 0; k < 64; ++k) {
      const Point x2{reach * k / 64.0, 0.0};
      const double j = model.J(x2);
      if (j == 0.0) continue;
      ++pairs;
      if (!holley_single_bond_check(model, s.for_coupling(j), plan.bond_epsilon, {0.0, 0.0}, x2, 256)) ++failures;
    }
    CheckResult c = compare(static_cast<double>(failures), "<=", 0.0);
    c.details["pairs"] = pairs;
    return c;
  });

  run_check(report, "domination.exhaustive", [&] {
    const auto& s = need_split();
    double worst = std::numeric_limits<double>::infinity();
    std::size_t systems = 0, upsets = 0;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& t : tiny_systems()) {
      const TinyBondLaw law = tiny_bond_law(model, s, plan.bond_epsilon, Window(0.5), t.interior,
                                            Configuration(t.boundary), t.interior.size() == 3 ? 24 : 48);
      const DominationResult r = exhaustive_domination_check(law.pi, law.eps);
      ++systems;
      upsets += r.upsets_checked;
      worst = std::min(worst, r.min_slack);
      per.push_back({{"system", t.name}, {"bonds", law.bonds.size()}, {"min_slack", r.min_slack}});
    }
    CheckResult c = compare(worst, ">=", -1e-9);
    c.details["systems"] = systems;
    c.details["upsets"] = upsets;
    c.details["per_system"] = per;
    return c;
  });

}

}  // namespace

Report run_domination_suite(const ExperimentPlan& plan) {
  plan.validate();
  Report report = new_report(plan, "domination");
  std::optional<SignSplitDecomposition> split;
  run_check(report, "smoothing.decomposition", [&] {
    split = sign_split_decompose(plan.model.V_function(), plan.epsilon);
    return compare(split->plus.delta(), ">", 0.0);
  });
  add_domination_checks(report, plan, split);
  return report;
}

Report run_lemma_suite(const ExperimentPlan& plan) {
  plan.validate();
  Report report = new_report(plan, "lemma");
  const PairPotentialModel& model = plan.model;
  std::optional<SignSplitDecomposition> split;

  run_check(report, "smoothing.decomposition", [&] {
    split = sign_split_decompose(model.V_function(), plan.epsilon);
    CheckResult c = compare(split->plus.delta(), ">", 0.0);
    c.details["delta"] = split->plus.delta();
    c.details["vbar_second_sup"] = vbar_second_bound(*split);
    return c;
  });
  auto need_split = [&]() -> const SignSplitDecomposition& {
    if (!split) throw std::runtime_error("smooth decomposition unavailable");
    return *split;
  };
  auto reports = [&] {
    const auto& s = need_split();
    const double half = kTwoPi / 4096.0 / 2.0;
    return std::vector<DecompositionReport>{inspect(s.plus, 4096, 0.0), inspect(s.plus, 4096, half),
                                            inspect(s.minus, 4096, 0.0), inspect(s.minus, 4096, half)};
  };
  run_check(report, "smoothing.reconstruction", [&] {
    double worst = 0.0;
    for (const auto& r : reports()) worst = std::max(worst, r.max_reconstruction_error);
    return compare(worst, "<=", 1e-10);
  });
  run_check(report, "smoothing.v_strictly_inside", [&] {
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& r : reports()) slack = std::min({slack, r.min_v, plan.epsilon - r.max_v});
    return compare(slack, ">", 0.0);
  });
  run_check(report, "smoothing.second_derivative", [&] {
    const auto& s = need_split();
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto* d : {&s.plus, &s.minus}) excess = std::max(excess, d->Vbar_second_sup() - d->second_derivative_bound());
    CheckResult c = compare(excess, "<=", 1e-8);
    c.details["vbar_second_sup"] = s.plus.Vbar_second_sup();
    c.details["mollifier_bound"] = s.plus.second_derivative_bound();
    return c;
  });

  run_check(report, "expansion.identity", [&] {
    Rng rng(derive_seed(plan.seed, 101));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      std::vector<double> w(static_cast<std::size_t>(k % 13));
      for (double& x : w) x = rng.uniform(0.0, 0.2);
      worst = std::max(worst, expansion_identity_check(w));
    }
    CheckResult c = compare(worst, "<=", 1e-10);
    c.details["vectors"] = 100;
    return c;
  });

  add_domination_checks(report, plan, split);

  // Sampled instances shared by the remaining checks.
  const Configuration boundary = make_boundary(plan, model, plan.n, derive_seed(plan.seed, 7));
  std::vector<std::vector<Configuration>> samples(plan.replicates);
  std::vector<ReplicateStats> stats(plan.replicates);
  const std::vector<int> radii = candidate_radii(plan);
  const TaperParams taper = plan.taper();
  const Window test_window(plan.n_prime);
  Stopwatch sampling_clock;
  std::string sampling_error;
  try {
    const auto& s = need_split();
    const double threshold = 2.0 / vbar_second_bound(s);
    parallel_for(plan.replicates, plan.threads, [&](std::size_t r) {
      const std::uint64_t rseed = derive_seed(plan.seed, 1000 + r);
      samples[r] = replicate_samples(plan, model, plan.n, boundary, plan.sampler.sweeps, rseed);
      ReplicateStats& st = stats[r];
      st.grid_range_exceed.assign(radii.size(), 0);
      st.grid_energy_exceed.assign(radii.size(), 0);
      std::size_t k = 0;
      for (const Configuration& cfg : samples[r]) {
        const BondSet pairs = bond_set(cfg, model, plan.n);
        for (std::size_t b = 0; b < plan.bond_samples; ++b, ++k) {
          const BondSample bs = sample_bonds(cfg, model, s, plan.n, derive_seed(rseed, k));
          ++st.instances;
          for (std::size_t e = 0; e < bs.bonds.size(); ++e) {
            ++st.bonds_checked;
            const double eps_e = bernoulli_probability(model, plan.bond_epsilon, cfg[bs.bonds[e].i], cfg[bs.bonds[e].j]);
            if (!(bs.probability[e] <= eps_e)) ++st.pointwise_violations;
          }
          const std::vector<Bond> open = bs.present_set().bonds;
          const ClusterDecomposition cl = clusters(cfg, open);
          const double range = cluster_range(cfg, cl, test_window);
          st.max_range = std::max(st.max_range, range);
          const DeformationField field = cluster_taper(cfg, cl, taper);
          const double f = dirichlet_energy(cfg, model, pairs, field);
          st.max_energy = std::max(st.max_energy, f);
          const bool range_ok = range < plan.R;
          const bool energy_ok = f < threshold;
          if (!range_ok) ++st.range_exceed;
          if (!energy_ok) ++st.energy_exceed;
          for (std::size_t g = 0; g < radii.size(); ++g) {
            if (range >= radii[g]) ++st.grid_range_exceed[g];
            const TaperParams tg{plan.tau, radii[g], plan.n, plan.n_prime};
            if (dirichlet_energy(cfg, model, pairs, cluster_taper(cfg, cl, tg)) >= threshold) ++st.grid_energy_exceed[g];
          }
          if (range_ok && energy_ok) {
            ++st.good;
            const TaylorMargin tm = taylor_margin(cfg, model, s, pairs, field);
            st.min_margin = std::min(st.min_margin, tm.margin);
            if (!tm.finite || tm.margin < 0.0) ++st.taylor_violations;
            if (!tm.bound_ok()) ++st.second_difference_violations;
          }
          if (!plan.out_dir.empty() && k == 0) {
            std::ostringstream sample_csv, bond_csv, field_csv;
            write_csv(sample_csv, cfg);
            bond_csv << "i,j,p_e,present\n";
            for (std::size_t e = 0; e < bs.bonds.size(); ++e)
              bond_csv << bs.bonds[e].i << "," << bs.bonds[e].j << "," << bs.probability[e] << ","
                       << (bs.present[e] ? 1 : 0) << "\n";
            field_csv << "id,angle,witness\n";
            for (std::size_t i = 0; i < cfg.size(); ++i)
              field_csv << i << "," << field.angle[i] << "," << field.witness[i] << "\n";
            write_text(plan.out_dir / "samples" / replicate_name(r), sample_csv.str());
            write_text(plan.out_dir / "bonds" / replicate_name(r), bond_csv.str());
            write_text(plan.out_dir / "fields" / replicate_name(r), field_csv.str());
          }
        }
      }
    });
  } catch (const std::exception& e) {
    sampling_error = e.what();
  }
  const double sampling_seconds = sampling_clock.seconds();

  ReplicateStats total;
  total.grid_range_exceed.assign(radii.size(), 0);
  total.grid_energy_exceed.assign(radii.size(), 0);
  for (const auto& st : stats) {
    total.instances += st.instances;
    total.bonds_checked += st.bonds_checked;
    total.pointwise_violations += st.pointwise_violations;
    total.range_exceed += st.range_exceed;
    total.energy_exceed += st.energy_exceed;
    total.good += st.good;
    total.taylor_violations += st.taylor_violations;
    total.second_difference_violations += st.second_difference_violations;
    total.min_margin = std::min(total.min_margin, st.min_margin);
    total.max_energy = std::max(total.max_energy, st.max_energy);
    total.max_range = std::max(total.max_range, st.max_range);
    for (std::size_t g = 0; g < radii.size() && g < st.grid_range_exceed.size(); ++g) {
      total.grid_range_exceed[g] += st.grid_range_exceed[g];
      total.grid_energy_exceed[g] += st.grid_energy_exceed[g];
    }
  }
  auto sampled = [&] {
    if (!sampling_error.empty()) throw std::runtime_error(sampling_error);
    if (total.instances == 0) throw std::runtime_error("no sampled instances");
  };
  const double instances = static_cast<double>(std::max<std::size_t>(total.instances, 1));

  run_check(report, "domination.pointwise", [&] {
    sampled();
    CheckResult c = compare(static_cast<double>(total.pointwise_violations), "<=", 0.0);
    c.details["bonds_checked"] = total.bonds_checked;
    c.details["sampling_seconds"] = sampling_seconds;
    return c;
  });
  run_check(report, "clusters.range_tail", [&] {
    sampled();
    CheckResult c = compare(total.range_exceed / instances, "<=", plan.delta);
    c.advisory = true;
    c.details["instances"] = total.instances;
    c.details["max_range"] = total.max_range;
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    std::optional<int> first;
    for (std::size_t g = 0; g < radii.size(); ++g) {
      const double pr = total.grid_range_exceed[g] / instances, pe = total.grid_energy_exceed[g] / instances;
      grid.push_back({{"R", radii[g]}, {"range_tail", pr}, {"energy_tail", pe}});
      if (!first && pr <= plan.delta && pe <= plan.delta) first = radii[g];
    }
    c.details["R_grid"] = grid;
    c.details["first_passing_R"] = first ? nlohmann::ordered_json(*first) : nlohmann::ordered_json(nullptr);
    return c;
  });
  run_check(report, "deformation.energy_tail", [&] {
    sampled();
    CheckResult c = compare(total.energy_exceed / instances, "<=", plan.delta);
    c.advisory = true;
    c.details["max_energy"] = total.max_energy;
    c.details["threshold"] = 2.0 / vbar_second_bound(need_split());
    return c;
  });
  run_check(report, "deformation.good_instances", [&] {
    sampled();
    CheckResult c = compare(static_cast<double>(total.good), ">", 0.0);
    c.advisory = true;
    c.details["instances"] = total.instances;
    return c;
  });
  run_check(report, "deformation.taylor_margin", [&] {
    sampled();
    CheckResult c = compare(static_cast<double>(total.taylor_violations), "<=", 0.0);
    c.details["good_instances"] = total.good;
    c.details["min_margin"] = total.good ? nlohmann::ordered_json(total.min_margin) : nlohmann::ordered_json(nullptr);
    return c;
  });
  run_check(report, "deformation.second_difference", [&] {
    sampled();
    CheckResult c = compare(static_cast<double>(total.second_difference_violations), "<=", 0.0);
    c.details["good_instances"] = total.good;
    return c;
  });
  if (!plan.out_dir.empty()) report.write(plan.out_dir / "report.json");
  return report;
}

Report run_main_inequality(const ExperimentPlan& plan, const TestEvent& event) {
  plan.validate();
  Report report = new_report(plan, "main-inequality");
  const PairPotentialModel& model = plan.model;
  run_check(report, "main_inequality." + event.name, [&] {
    const SignSplitDecomposition split = sign_split_decompose(model.V_function(), plan.epsilon);
    const double threshold = 2.0 / vbar_second_bound(split);
    const Configuration boundary = make_boundary(plan, model, plan.n, derive_seed(plan.seed, 7));
    const Spin tau = Spin::from_angle(plan.tau);
    const TaperParams taper = plan.taper();
    const Window test_window(plan.n_prime);
    struct Acc {
      double margin = 0.0, p_b = 0.0, p_plus = 0.0, p_minus = 0.0, p_good = 0.0;
      std::size_t instances = 0, field_mismatch = 0;
    };
    std::vector<Acc> acc(plan.replicates);
    parallel_for(plan.replicates, plan.threads, [&](std::size_t r) {
      const std::uint64_t rseed = derive_seed(plan.seed, 1000 + r);
      const auto samples = replicate_samples(plan, model, plan.n, boundary, plan.sampler.sweeps, rseed);
      Acc& a = acc[r];
      std::size_t k = 0;
      for (const Configuration& cfg : samples) {
        const BondSet pairs = bond_set(cfg, model, plan.n);
        // tau^{-1} B holds when tau Y is in B, tau B when tau^{-1} Y is.
        const bool b = event(cfg);
        const bool b_inv = event(cfg.rotated(tau));
        const bool b_fwd = event(cfg.rotated(-tau));
        for (std::size_t j = 0; j < plan.bond_samples; ++j, ++k) {
          const BondSample bs = sample_bonds(cfg, model, split, plan.n, derive_seed(rseed, k));
          const ClusterDecomposition cl = clusters(cfg, bs.present_set().bonds);
          const DeformationField field = cluster_taper(cfg, cl, taper);
          const bool good = cluster_range(cfg, cl, test_window) < plan.R &&
                            dirichlet_energy(cfg, model, pairs, field) < threshold;
          ++a.instances;
          if (!good) continue;
          // On good bond sets the field equals tau on the test window, so
          // the cluster deformation moves B exactly like the global rotation.
          if (event(apply_deformation(cfg, field, +1)) != b_inv || event(apply_deformation(cfg, field, -1)) != b_fwd)
            ++a.field_mismatch;
          a.p_good += 1.0;
          a.p_b += b;
          a.p_plus += b_inv;
          a.p_minus += b_fwd;
          a.margin += 0.5 * std::numbers::e * (b_inv + b_fwd) - b;
        }
      }
      if (a.instances) {
        const double n = static_cast<double>(a.instances);
        a.margin /= n;
        a.p_b /= n;
        a.p_plus /= n;
        a.p_minus /= n;
        a.p_good /= n;
      }
    });
    std::vector<double> margins, pb, pp, pm, pg;
    std::size_t mismatches = 0, instances = 0;
    for (const auto& a : acc) {
      margins.push_back(a.margin);
      pb.push_back(a.p_b);
      pp.push_back(a.p_plus);
      pm.push_back(a.p_minus);
      pg.push_back(a.p_good);
      mismatches += a.field_mismatch;
      instances += a.instances;
    }
    const double m = mean(margins);
    const double se = standard_error(margins);
    const bool insufficient = !(se == se);
    const double floor = -2.0 * plan.delta - 3.0 * (insufficient ? 0.0 : se);
    CheckResult c = compare(m, ">=", floor);
    c.advisory = insufficient;
    c.pass = c.pass && mismatches == 0;
    c.details["standard_error"] = insufficient ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(se);
    c.details["insufficient_samples"] = insufficient;
    c.details["p_B_and_good"] = mean(pb);
    c.details["p_tau_inverse_B_and_good"] = mean(pp);
    c.details["p_tau_B_and_good"] = mean(pm);
    c.details["p_good"] = mean(pg);
    c.details["instances"] = instances;
    c.details["field_rotation_mismatches"] = mismatches;
    c.details["good_set_substitution"] = "good configurations approximated by the range and energy clauses of the sampled bond set";
    return c;
  });
  return report;
}

Report run_symmetry_scan(const ExperimentPlan& plan, const TestEvent& event) {
  plan.validate();
  Report report = new_report(plan, "symmetry");
  const PairPotentialModel& model = plan.model;

  struct SizeResult {
    int n = 0;
    double order = 0.0, order_se = 0.0;
    std::vector<double> p_tau;  // P(tau B) over the tau grid
  };
  std::vector<SizeResult> sizes;
  std::string scan_error;
  try {
    for (int n : plan.symmetry_sizes) {
      const Configuration boundary = make_boundary(plan, model, n, derive_seed(plan.seed, 5000 + n));
      const std::size_t reps = plan.symmetry_replicates;
      std::vector<double> order(reps);
      std::vector<std::vector<double>> hits(reps, std::vector<double>(plan.symmetry_taus.size(), 0.0));
      std::vector<std::size_t> counts(reps, 0);
      parallel_for(reps, plan.threads, [&](std::size_t r) {
        const auto samples =
            replicate_samples(plan, model, n, boundary, plan.symmetry_sweeps, derive_seed(plan.seed, 9000 + 97 * n + r));
        double c = 0.0, s = 0.0;
        std::size_t k = 0;
        for (const Configuration& cfg : samples) {
          const SpinSum sum = window_spin_sum(cfg, plan.n_prime);
          c += sum.c;
          s += sum.s;
          k += sum.count;
          for (std::size_t t = 0; t < plan.symmetry_taus.size(); ++t)
            hits[r][t] += event(cfg.rotated(-Spin::from_angle(plan.symmetry_taus[t])));
        }
        order[r] = k ? std::hypot(c, s) / static_cast<double>(k) : 0.0;
        counts[r] = samples.size();
      });
      SizeResult res;
      res.n = n;
      res.order = mean(order);
      res.order_se = standard_error(order);
      std::size_t total = 0;
      for (auto c : counts) total += c;
      for (std::size_t t = 0; t < plan.symmetry_taus.size(); ++t) {
        double h = 0.0;
        for (std::size_t r = 0; r < reps; ++r) h += hits[r][t];
        res.p_tau.push_back(total ? h / static_cast<double>(total) : 0.0);
      }
      sizes.push_back(std::move(res));
    }
  } catch (const std::exception& e) {
    scan_error = e.what();
  }

  run_check(report, "symmetry.order_parameter_trend", [&] {
    if (!scan_error.empty()) throw std::runtime_error(scan_error);
    // One-sided z-tests for an increase between consecutive sizes,
    // Bonferroni-corrected to a 5% family level.
    const std::size_t comparisons = sizes.size() > 1 ? sizes.size() - 1 : 1;
    const double critical = comparisons == 1 ? 1.6448536269514722 : comparisons == 2 ? 1.959963984540054 : 2.128045234184984;
    double worst = -std::numeric_limits<double>::infinity();
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& s : sizes) {
      nlohmann::ordered_json e{{"n", s.n}, {"order_parameter", s.order}, {"standard_error", s.order_se}};
      nlohmann::ordered_json taus = nlohmann::ordered_json::array();
      for (std::size_t t = 0; t < plan.symmetry_taus.size(); ++t)
        taus.push_back({{"tau", plan.symmetry_taus[t]}, {"p_tau_B", s.p_tau[t]}, {"abs_diff", std::abs(s.p_tau[t] - s.p_tau[0])}});
      e["event"] = taus;
      per.push_back(e);
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      const double se = std::hypot(sizes[i].order_se, sizes[i - 1].order_se);
      const double zstat = se > 0.0 ? (sizes[i].order - sizes[i - 1].order) / se
                                    : (sizes[i].order > sizes[i - 1].order ? std::numeric_limits<double>::infinity() : 0.0);
      worst = std::max(worst, zstat);
    }
    CheckResult c = compare(sizes.size() > 1 ? worst : 0.0, "<=", critical);
    c.details["sizes"] = per;
    c.details["event"] = event.name;
    return c;
  });

  run_check(report, "symmetry.tau_zero", [&] {
    if (!scan_error.empty()) throw std::runtime_error(scan_error);
    double worst = 0.0;
    const Spin zero = Spin::from_angle(0.0);
    for (const auto& s : sizes) {
      for (std::size_t t = 0; t < plan.symmetry_taus.size(); ++t)
        if (plan.symmetry_taus[t] == 0.0) worst = std::max(worst, std::abs(s.p_tau[t] - s.p_tau[0]));
    }
    // The zero rotation is the identity on spins.
    const Configuration probe({{{0.5, 0.5}, Spin::from_angle(1.0)}});
    if (!(probe.rotated(zero) == probe)) worst = 1.0;
    return compare(worst, "<=", 0.0);
  });

  auto matched = [&](const PairPotentialModel& m) {
    const int n = plan.symmetry_sizes.front();
    ExperimentPlan p = plan;
    const Configuration boundary = make_boundary(p, m, n, derive_seed(plan.seed, 77));
    const Spin tau = Spin::from_angle(plan.tau);
    const std::uint64_t seed = derive_seed(plan.seed, 78);
    const std::size_t sweeps = std::min<std::size_t>(plan.symmetry_sweeps, 100);
    const auto base = replicate_samples(p, m, n, boundary, sweeps, seed);
    const auto turned = replicate_samples(p, m, n, boundary.rotated(tau), sweeps, seed, tau);
    std::size_t mismatches = base.size() == turned.size() ? 0 : 1;
    double pb = 0.0, ptb = 0.0;
    for (std::size_t k = 0; k < std::min(base.size(), turned.size()); ++k) {
      if (!(base[k].rotated(tau) == turned[k])) ++mismatches;
      pb += event(base[k]);
      ptb += event(turned[k].rotated(-tau));
    }
    CheckResult c = compare(static_cast<double>(mismatches) + std::abs(pb - ptb), "<=", 0.0);
    c.details["samples"] = base.size();
    c.details["p_B"] = base.empty() ? 0.0 : pb / static_cast<double>(base.size());
    c.details["p_tau_B_rotated_boundary"] = turned.empty() ? 0.0 : ptb / static_cast<double>(turned.size());
    return c;
  };
  run_check(report, "symmetry.matched_seed_ideal_gas", [&] { return matched(PairPotentialModel::ideal_gas()); });
  run_check(report, "symmetry.matched_seed_model", [&] { return matched(model); });
  return report;
}

}  // namespace gibbsym
