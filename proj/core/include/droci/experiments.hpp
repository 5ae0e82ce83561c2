#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "droci/correction.hpp"
#include "droci/influence.hpp"
#include "droci/sample.hpp"

namespace droci {

enum class DataLaw {
  Gamma21,          // iid Gamma(shape 2, scale 1), one column
  StudentT3,        // iid t with 3 df, one column
  Regression,       // rows (y, z): z ~ chi^2_2, y = z + N(0,1)
  BivariateNormal,  // two independent standard normal columns
};

DataLaw parse_data_law(const std::string& name);
std::string data_law_name(DataLaw law);
std::size_t data_law_dim(DataLaw law);

Sample sample_law(DataLaw law, std::size_t n, std::uint64_t seed);

// Model spec string "smooth:<name> | vstat:<name> | optim:<name>" resolved
// against the registries.
InfluenceModel build_model(const std::string& model_spec, const Sample& sample);

struct ScenarioConfig {
  std::string model;       // e.g. "vstat:gamma-kernel"
  std::string divergence;  // e.g. "reverse-kl"
  std::string data_law;    // e.g. "gamma(2,1)"
  std::size_t n = 30;
  std::vector<double> nominal_levels;
  std::vector<std::string> methods;  // el | eb | tb | tb2
  std::size_t reps = 10000;
  std::uint64_t base_seed = 1;
  std::size_t oracle_reps = 5000;
  std::optional<double> truth_analytic;
  std::size_t truth_pairs = 1000000;
  std::size_t threads = 0;  // 0: DRO_CI_THREADS env, else hardware
};

struct TruthEstimate {
  double value = 0.0;
  double se = 0.0;  // 0 for analytic truth
};

TruthEstimate estimate_truth(const ScenarioConfig& config);

struct CoverageCell {
  std::string method;
  double level = 0.0;
  double coverage = 0.0;
  double half_width = 0.0;  // 1.96 sqrt(p(1-p)/valid reps)
  double mean_width = 0.0;
  std::size_t failures = 0;
  std::size_t reps_completed = 0;
};

struct CoverageReport {
  ScenarioConfig config;
  TruthEstimate truth;
  std::vector<CoverageCell> cells;
};

// Monte Carlo coverage of the four interval methods. Deterministic for a
// fixed config regardless of worker-thread count: replications are seeded
// independently and reduced in index order.
CoverageReport run_coverage(const ScenarioConfig& config);

}  // namespace droci
