#include "gibbsym/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gibbsym/bonds.hpp"
#include "gibbsym/deformation.hpp"
#include "gibbsym/harness.hpp"
#include "gibbsym/worker_pool.hpp"

namespace gibbsym {

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::string model;
  long long seed = -1;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentPlan load_plan(const Globals& g) {
  ExperimentPlan plan;
  if (!g.config.empty()) {
    plan = ExperimentPlan::load(g.config);
  } else {
    plan.epsilon = plan.bond_epsilon = ExperimentPlan::default_epsilon(plan.model, plan.z, plan.xi);
  }
  if (!g.model.empty()) {
    plan.model_path = g.model;
    plan.model = PairPotentialModel::load(g.model);
    if (g.config.empty()) plan.epsilon = plan.bond_epsilon = ExperimentPlan::default_epsilon(plan.model, plan.z, plan.xi);
  }
  if (g.seed >= 0) {
    plan.seed = static_cast<std::uint64_t>(g.seed);
    plan.sampler.seed = plan.seed;
  }
  if (!g.out.empty()) plan.out_dir = g.out;
  if (plan.out_dir.empty()) plan.out_dir = "gibbsym-out";
  plan.validate();
  return plan;
}

Configuration read_configuration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  return read_csv(in);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void print_summary(const Report& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.pass ? "PASS" : (c.advisory ? "NOTE" : "FAIL")) << "  " << c.name << "  statistic=" << c.statistic
              << " " << c.comparison << " " << c.threshold;
    if (c.details.contains("error")) std::cout << "  error: " << c.details["error"].get<std::string>();
    std::cout << "\n";
  }
}

int finish(const Report& r, const std::filesystem::path& out) {
  r.write(out / "report.json");
  print_summary(r);
  std::cout << "report: " << (out / "report.json").string() << "\n";
  return r.all_pass() ? 0 : 1;
}

int cmd_sample(const Globals& g, int n_override, std::size_t replicates, const std::string& boundary_path) {
  ExperimentPlan plan = load_plan(g);
  const int n = n_override > 0 ? n_override : plan.n;
  if (replicates > 0) plan.replicates = replicates;
  const Configuration boundary = boundary_path.empty() ? make_boundary(plan, plan.model, n, derive_seed(plan.seed, 7))
                                                       : read_configuration(boundary_path);
  for (const auto& b : boundary)
    if (Window(n).contains(b.position)) throw std::invalid_argument("boundary particle inside the sampling window");
  struct Run {
    std::vector<Configuration> samples;
    std::vector<std::array<double, 3>> trace;  // sweep, energy, count
    MoveStats stats;
  };
  std::vector<Run> runs(plan.replicates);
  parallel_for(plan.replicates, plan.threads, [&](std::size_t r) {
    SamplerParams params = plan.sampler;
    params.z = plan.z;
    params.seed = derive_seed(plan.seed, 1000 + r);
    Run& run = runs[r];
    run_chain(plan.model, Window(n), boundary, Configuration{}, params, [&](std::size_t sweep, const GibbsChain& chain) {
      run.trace.push_back({static_cast<double>(sweep), chain.cached_energy(), static_cast<double>(chain.size())});
      if (sweep % plan.sample_every == 0) run.samples.push_back(chain.inside());
      run.stats = chain.stats();
    });
  });
  static const char* move_names[] = {"birth", "death", "translate", "rotate"};
  nlohmann::ordered_json summary;
  summary["n"] = n;
  summary["model"] = plan.model.name();
  summary["boundary_particles"] = boundary.size();
  auto& reps = summary["replicates"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    double count = 0.0;
    for (const auto& cfg : run.samples) count += static_cast<double>(cfg.size());
    const double mean_count = run.samples.empty() ? 0.0 : count / static_cast<double>(run.samples.size());
    nlohmann::ordered_json rates = nlohmann::ordered_json::object();
    for (std::size_t m = 0; m < 4; ++m) rates[move_names[m]] = run.stats.rate(static_cast<MoveType>(m));
    nlohmann::ordered_json energy = nlohmann::ordered_json::array();
    for (const auto& t : run.trace) energy.push_back(t[1]);
    reps.push_back({{"samples", run.samples.size()},
                    {"mean_count", mean_count},
                    {"density", mean_count / Window(n).area()},
                    {"acceptance_rates", rates},
                    {"energy_trace", energy}});
    char name[48];
    std::snprintf(name, sizeof name, "energy_%03zu.csv", r);
    auto trace = open_out(plan.out_dir / "samples" / name);
    trace << "sweep,energy,count\n";
    for (const auto& t : run.trace) trace << t[0] << "," << t[1] << "," << t[2] << "\n";
    if (run.samples.empty()) continue;
    std::snprintf(name, sizeof name, "replicate_%03zu.csv", r);
    auto out = open_out(plan.out_dir / "samples" / name);
    write_csv(out, run.samples.back());
  }
  open_out(plan.out_dir / "sample.json") << summary.dump(2) << "\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::cout << "replicate " << r << ": mean count " << reps[r]["mean_count"].get<double>() << ", acceptance";
    for (const char* m : move_names) std::cout << " " << m << "=" << reps[r]["acceptance_rates"][m].get<double>();
    std::cout << "\n";
  }
  std::cout << "summary: " << (plan.out_dir / "sample.json").string() << "\n";
  return 0;
}

int cmd_decompose(const Globals& g, double epsilon) {
  ExperimentPlan plan = load_plan(g);
  const double eps = epsilon > 0.0 ? epsilon : plan.epsilon;
  const SignSplitDecomposition split = sign_split_decompose(plan.model.V_function(), eps);
  auto out = open_out(plan.out_dir / "decomposition.csv");
  out << "angle,V,Vbar_plus,v_plus,Vbar_minus,v_minus\n";
  for (int k = 0; k < 512; ++k) {
    const double s = kTwoPi * k / 512.0;
    out << s << "," << split.plus.V(s) << "," << split.plus.Vbar(s) << "," << split.plus.v(s) << ","
        << split.minus.Vbar(s) << "," << split.minus.v(s) << "\n";
  }
  const DecompositionReport r = inspect(split.plus);
  nlohmann::ordered_json j{{"epsilon", eps},
                           {"delta", split.plus.delta()},
                           {"vbar_second_sup", vbar_second_bound(split)},
                           {"mollifier_bound", split.plus.second_derivative_bound()},
                           {"max_reconstruction_error", r.max_reconstruction_error},
                           {"min_v", r.min_v},
                           {"max_v", r.max_v}};
  std::cout << j.dump(2) << "\n";
  const bool ok = r.max_reconstruction_error <= 1e-10 && r.min_v > 0.0 && r.max_v < eps;
  return ok ? 0 : 1;
}

int cmd_bonds(const Globals& g, const std::string& input, int n_override) {
  ExperimentPlan plan = load_plan(g);
  const int n = n_override > 0 ? n_override : plan.n;
  const Configuration cfg = read_configuration(input);
  const SignSplitDecomposition split = sign_split_decompose(plan.model.V_function(), plan.epsilon);
  const BondSample bs = sample_bonds(cfg, plan.model, split, n, derive_seed(plan.seed, 3));
  auto out = open_out(plan.out_dir / "bonds" / "bonds.csv");
  out << "i,j,p_e,present\n";
  for (std::size_t e = 0; e < bs.bonds.size(); ++e)
    out << bs.bonds[e].i << "," << bs.bonds[e].j << "," << bs.probability[e] << "," << (bs.present[e] ? 1 : 0) << "\n";
  const ClusterDecomposition cl = clusters(cfg, bs.present_set());
  nlohmann::ordered_json j;
  j["labels"] = cl.label;
  j["max_norm"] = cl.max_norm;
  j["clusters"] = cl.count();
  j["range_test_window"] = cluster_range(cfg, cl, Window(plan.n_prime));
  j["range_window"] = cluster_range(cfg, cl, Window(n));
  open_out(plan.out_dir / "bonds" / "clusters.json") << j.dump(2) << "\n";
  std::cout << "bonds: " << bs.bonds.size() << "  open: " << bs.present_set().size() << "  clusters: " << cl.count()
            << "\n";
  return 0;
}

int cmd_deform(const Globals& g, const std::string& input, const std::string& bonds_path) {
  ExperimentPlan plan = load_plan(g);
  const Configuration cfg = read_configuration(input);
  std::vector<Bond> open;
  {
    std::ifstream in(bonds_path);
    if (!in) throw UsageError("cannot read " + bonds_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string a, b, p, present;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      std::getline(ss, p, ',');
      std::getline(ss, present, ',');
      if (present == "1") open.push_back(make_bond(std::stoull(a), std::stoull(b)));
    }
  }
  const SignSplitDecomposition split = sign_split_decompose(plan.model.V_function(), plan.epsilon);
  const TaperParams taper = plan.taper();
  const ClusterDecomposition cl = clusters(cfg, open);
  const DeformationField field = cluster_taper(cfg, cl, taper);
  auto out = open_out(plan.out_dir / "fields" / "field.csv");
  out << "id,angle,witness\n";
  for (std::size_t i = 0; i < cfg.size(); ++i) out << i << "," << field.angle[i] << "," << field.witness[i] << "\n";
  const GoodSetVerdict v = good_set_verdict(cfg, plan.model, split, open, taper);
  const TaylorMargin tm = taylor_margin(cfg, plan.model, split, bond_set(cfg, plan.model, plan.n), field);
  nlohmann::ordered_json j{{"range", v.range},          {"range_ok", v.range_ok},
                           {"energy", v.energy},        {"threshold", v.threshold},
                           {"energy_ok", v.energy_ok},  {"is_good", v.is_good},
                           {"taylor_margin", tm.margin}, {"second_difference", tm.second_difference},
                           {"second_difference_bound", tm.bound}, {"finite", tm.finite}};
  open_out(plan.out_dir / "verdict.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  // On good sets the margin must be nonnegative and the second difference bounded.
  return (!v.is_good || (tm.finite && tm.margin >= 0.0 && tm.bound_ok())) ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& inputs) {
  bool ok = true;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    const Report r = Report::from_json(nlohmann::ordered_json::parse(in));
    std::cout << "== " << path << " (" << r.suite << ", seed " << r.seed << ")\n";
    print_summary(r);
    ok = ok && r.all_pass();
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Sampling and verification tools for marked Gibbs point processes with a continuous spin symmetry"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "plan file (flat key = value)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "master seed (overrides the plan)")->check(CLI::NonNegativeNumber);
  app.add_option("--model", g.model, "model file (overrides the plan)")->check(CLI::ExistingFile);

  int n_override = 0;
  std::size_t replicates = 0;
  double epsilon = 0.0;
  std::string input, bonds_path, event = "";
  std::vector<std::string> reports;

  auto* sample = app.add_subcommand("sample", "run Gibbs chains and write sample CSVs");
  sample->add_option("--n", n_override, "window half-width");
  sample->add_option("--replicates", replicates, "number of chains");
  std::string boundary_path;
  sample->add_option("--boundary", boundary_path, "boundary configuration CSV (default: generated from the plan)")
      ->check(CLI::ExistingFile);
  auto* decompose = app.add_subcommand("decompose", "smooth decomposition of V");
  decompose->add_option("--epsilon", epsilon, "smoothing epsilon");
  auto* bonds = app.add_subcommand("bonds", "sample bonds for a configuration and label clusters");
  bonds->add_option("--input", input, "configuration CSV")->required()->check(CLI::ExistingFile);
  bonds->add_option("--n", n_override, "bond window half-width");
  auto* domination = app.add_subcommand("verify-domination", "Holley bracket and exhaustive domination checks");
  auto* deform = app.add_subcommand("deform", "cluster taper, good-set verdict and Taylor margin");
  deform->add_option("--input", input, "configuration CSV")->required()->check(CLI::ExistingFile);
  deform->add_option("--bonds", bonds_path, "bond CSV (i,j,p_e,present)")->required()->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "run the lemma suite");
  auto* experiment = app.add_subcommand("experiment", "main inequality and symmetry scan");
  experiment->add_option("--event", event, "sector, count-band, half-plane, full or impossible");
  auto* report = app.add_subcommand("report", "summarize report files");
  report->add_option("inputs", reports, "report.json files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*sample) return cmd_sample(g, n_override, replicates, boundary_path);
    if (*decompose) return cmd_decompose(g, epsilon);
    if (*bonds) return cmd_bonds(g, input, n_override);
    if (*deform) return cmd_deform(g, input, bonds_path);
    if (*report) return cmd_report(reports);
    const ExperimentPlan plan = load_plan(g);
    if (*domination) return finish(run_domination_suite(plan), plan.out_dir);
    if (*verify) return finish(run_lemma_suite(plan), plan.out_dir);
    if (*experiment) {
      const TestEvent e = make_event(plan, event.empty() ? plan.event : event);
      Report r = run_main_inequality(plan, e);
      r.suite = "experiment";
      r.merge(run_symmetry_scan(plan, e));
      return finish(r, plan.out_dir);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gibbsym
