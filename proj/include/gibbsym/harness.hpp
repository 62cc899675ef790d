#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gibbsym/deformation.hpp"
#include "gibbsym/events.hpp"
#include "gibbsym/keyvalue.hpp"
#include "gibbsym/potential.hpp"
#include "gibbsym/report.hpp"
#include "gibbsym/sampler.hpp"

namespace gibbsym {

struct ExperimentPlan {
  std::filesystem::path model_path;
  PairPotentialModel model = PairPotentialModel::reference();
  int n = 16;
  int n_prime = 2;
  int R = 4;
  double tau = 0.35;
  double z = 0.6;
  double xi = 1.2;               // correlation constant entering the epsilon condition
  double epsilon = 0.0;          // smoothing epsilon
  double bond_epsilon = 0.0;     // Bernoulli bond epsilon
  double delta = 0.05;
  std::size_t replicates = 32;
  std::size_t threads = 0;
  SamplerParams sampler;
  std::size_t sample_every = 10;
  std::size_t bond_samples = 2;
  std::string boundary = "aligned";  // aligned | random | empty
  double boundary_spin = 0.0;

  std::string event = "half-plane";
  double event_direction = 0.0;
  double sector_lo = -0.7853981633974483;
  double sector_hi = 0.7853981633974483;
  int sector_min = 1;
  int count_lo = 1;
  int count_hi = 4;

  std::vector<int> symmetry_sizes{8, 16, 32};
  std::vector<double> symmetry_taus{0.0, 0.39269908169744964, 0.7853981633974483, 1.5707963267948966};
  std::size_t symmetry_replicates = 16;
  std::size_t symmetry_sweeps = 300;

  std::uint64_t seed = 1;
  std::filesystem::path out_dir;

  // 0.9 / (2 c_J z xi): the largest epsilon meeting 2 c_J z xi eps < 1 with
  // a 10% margin.
  static double default_epsilon(const PairPotentialModel& model, double z, double xi);

  TaperParams taper() const { return {tau, R, n, n_prime}; }
  // Throws std::invalid_argument on inconsistent fields.
  void validate() const;
  nlohmann::ordered_json to_json() const;

  static ExperimentPlan from_keyvalue(const KeyValueFile& kv);
  static ExperimentPlan load(const std::filesystem::path& path);
};

// Builds one of the shipped event families by name: sector, count-band,
// half-plane, full, impossible.
TestEvent make_event(const ExperimentPlan& plan, const std::string& name);

// Exterior configuration in Lambda_{n + cutoff} \ Lambda_n at activity z,
// hard-core thinned. `aligned` fixes every spin at plan.boundary_spin,
// `random` draws spins uniformly, `empty` returns no particles.
Configuration make_boundary(const ExperimentPlan& plan, const PairPotentialModel& model, int n, std::uint64_t seed);

// Full configurations (interior followed by boundary) recorded every
// plan.sample_every sweeps after burn-in, from one chain.
std::vector<Configuration> replicate_samples(const ExperimentPlan& plan, const PairPotentialModel& model, int n,
                                             const Configuration& boundary, std::size_t sweeps, std::uint64_t seed,
                                             Spin frame = Spin{});

// Holley bracket over a distance grid and exhaustive up-set domination on
// the shipped tiny systems.
Report run_domination_suite(const ExperimentPlan& plan);
Report run_lemma_suite(const ExperimentPlan& plan);
Report run_main_inequality(const ExperimentPlan& plan, const TestEvent& event);
Report run_symmetry_scan(const ExperimentPlan& plan, const TestEvent& event);

}  // namespace gibbsym
