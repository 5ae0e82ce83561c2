#include "droci/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "droci/dro.hpp"
#include "droci/errors.hpp"
#include "droci/moments.hpp"
#include "droci/rng.hpp"

namespace droci {

namespace {

// Fixed tag deriving the scenario-level oracle stream from the base seed,
// disjoint from per-replication streams (which use k = 0).
constexpr std::uint64_t kOracleTag = 0x0AC1E;
constexpr std::uint64_t kTruthTag = 0x7282;

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DRO_CI_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return std::size_t(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace

DataLaw parse_data_law(const std::string& name) {
  if (name == "gamma(2,1)" || name == "gamma") return DataLaw::Gamma21;
  if (name == "student-t(3)" || name == "t3") return DataLaw::StudentT3;
  if (name == "regression") return DataLaw::Regression;
  if (name == "bivariate-standard-normal" || name == "binormal")
    return DataLaw::BivariateNormal;
  throw ConfigError("unknown data law: " + name);
}

std::string data_law_name(DataLaw law) {
  switch (law) {
    case DataLaw::Gamma21: return "gamma(2,1)";
    case DataLaw::StudentT3: return "student-t(3)";
    case DataLaw::Regression: return "regression";
    case DataLaw::BivariateNormal: return "bivariate-standard-normal";
  }
  return "?";
}

std::size_t data_law_dim(DataLaw law) {
  switch (law) {
    case DataLaw::Gamma21:
    case DataLaw::StudentT3: return 1;
    case DataLaw::Regression:
    case DataLaw::BivariateNormal: return 2;
  }
  return 0;
}

Sample sample_law(DataLaw law, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = data_law_dim(law);
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    switch (law) {
      case DataLaw::Gamma21:
        data[i] = rng.gamma(2.0, 1.0);
        break;
      case DataLaw::StudentT3:
        data[i] = rng.student_t3();
        break;
      case DataLaw::Regression: {
        const double z = rng.chi2_2();
        data[i * 2] = z + rng.normal();  // y
        data[i * 2 + 1] = z;
        break;
      }
      case DataLaw::BivariateNormal:
        data[i * 2] = rng.normal();
        data[i * 2 + 1] = rng.normal();
        break;
    }
  }
  return Sample(std::move(data), n, d);
}

InfluenceModel build_model(const std::string& model_spec,
                           const Sample& sample) {
  const auto colon = model_spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("model spec must be class:name, got " + model_spec);
  const std::string cls = model_spec.substr(0, colon);
  const std::string name = model_spec.substr(colon + 1);
  if (cls == "smooth") return smooth_model(sample, lookup_smooth(name));
  if (cls == "vstat") return vstat_model(sample, lookup_kernel(name));
  if (cls == "optim") return optim_model(sample, lookup_loss(name));
  throw ConfigError("unknown model class: " + cls);
}

TruthEstimate estimate_truth(const ScenarioConfig& config) {
  TruthEstimate t;
  if (config.truth_analytic) {
    t.value = *config.truth_analytic;
    return t;
  }
  const auto colon = config.model.find(':');
  const std::string cls = config.model.substr(0, colon);
  const std::string name =
      colon == std::string::npos ? "" : config.model.substr(colon + 1);
  const DataLaw law = parse_data_law(config.data_law);

  if (cls == "optim") {
    // Regression scenario: the least-squares optimum equals the noise
    // variance, which is 1.
    t.value = 1.0;
    return t;
  }
  if (cls == "smooth") {
    // Functional of the mean; the laws in scope have known means.
    const SmoothFunction& f = lookup_smooth(name);
    std::vector<double> mean(data_law_dim(law), 0.0);
    if (law == DataLaw::Gamma21) mean[0] = 2.0;
    t.value = f.value(mean);
    return t;
  }
  if (cls == "vstat") {
    const Kernel& k = lookup_kernel(name);
    Rng rng(mix_seed(config.base_seed, kTruthTag, 2));
    double sum = 0.0, sumsq = 0.0;
    const std::size_t pairs = config.truth_pairs;
    for (std::size_t i = 0; i < pairs; ++i) {
      double x, y;
      switch (law) {
        case DataLaw::Gamma21:
          x = rng.gamma(2.0, 1.0);
          y = rng.gamma(2.0, 1.0);
          break;
        case DataLaw::StudentT3:
          x = rng.student_t3();
          y = rng.student_t3();
          break;
        default:
          throw ConfigError("V-statistic truth needs a scalar data law");
      }
      const double v = k.h(x, y);
      sum += v;
      sumsq += v * v;
    }
    t.value = sum / double(pairs);
    const double var = sumsq / double(pairs) - t.value * t.value;
    t.se = std::sqrt(var > 0.0 ? var / double(pairs) : 0.0);
    return t;
  }
  throw ConfigError("cannot estimate truth for model " + config.model);
}

CoverageReport run_coverage(const ScenarioConfig& config) {
  if (config.reps < 100) throw ConfigError("reps must be at least 100");
  if (config.n < 5) throw ConfigError("n must be at least 5");
  for (double lv : config.nominal_levels)
    if (!(lv > 0.0 && lv < 1.0))
      throw ConfigError("nominal levels must lie strictly in (0,1)");
  if (config.methods.empty() || config.nominal_levels.empty())
    throw ConfigError("methods and nominal levels must be nonempty");

  const DivergenceSpec spec = parse_divergence(config.divergence);
  const DataLaw law = parse_data_law(config.data_law);

  std::vector<RuleKind> kinds;
  kinds.reserve(config.methods.size());
  bool needs_oracle_moments = false, needs_oracle_smooth = false;
  for (const auto& mname : config.methods) {
    const RuleKind k = parse_rule_kind(mname);
    kinds.push_back(k);
    if (k == RuleKind::BartlettTheoretical) needs_oracle_moments = true;
    if (k == RuleKind::BartlettDicc) needs_oracle_smooth = true;
  }

  // Scenario-level oracle: one large draw feeding every replication's
  // theoretical correction.
  std::optional<MomentSet> oracle_moments;
  std::optional<StandardizedSmooth> oracle_smooth;
  if (needs_oracle_moments || needs_oracle_smooth) {
    const Sample oracle =
        sample_law(law, config.oracle_reps,
                   mix_seed(config.base_seed, kOracleTag, 1));
    if (needs_oracle_moments) {
      const InfluenceModel omodel = build_model(config.model, oracle);
      oracle_moments = estimate_moments(omodel, oracle);
    }
    if (needs_oracle_smooth) {
      const auto colon = config.model.find(':');
      if (config.model.substr(0, colon) != "smooth")
        throw ConfigError("tb2 applies to smooth-function models only");
      oracle_smooth = standardize_smooth(
          lookup_smooth(config.model.substr(colon + 1)), oracle);
    }
  }

  const TruthEstimate truth = estimate_truth(config);

  struct CellOutcome {
    bool failed = true;
    bool hit = false;
    double width = 0.0;
  };
  const std::size_t ncells = kinds.size() * config.nominal_levels.size();
  std::vector<std::vector<CellOutcome>> outcomes(
      config.reps, std::vector<CellOutcome>(ncells));

  auto run_rep = [&](std::size_t r) {
    const Sample sample =
        sample_law(law, config.n, mix_seed(config.base_seed, r));
    std::optional<InfluenceModel> model;
    std::optional<MomentSet> moments;
    try {
      model.emplace(build_model(config.model, sample));
      moments.emplace(estimate_moments(*model, sample));
    } catch (const Error&) {
      return;  // every cell stays failed
    }
    std::size_t cell = 0;
    for (std::size_t mi = 0; mi < kinds.size(); ++mi) {
      for (double level : config.nominal_levels) {
        CellOutcome& out = outcomes[r][cell++];
        try {
          BallSizeRule rule;
          rule.kind = kinds[mi];
          rule.nominal = level;
          rule.oracle_moments = oracle_moments;
          rule.oracle_smooth = oracle_smooth;
          const QSelection sel = select_q(rule, spec, *moments, config.n);
          const double lo =
              solve_dro_exact(*model, sample, spec, sel.q, Direction::Min)
                  .objective;
          const double hi =
              solve_dro_exact(*model, sample, spec, sel.q, Direction::Max)
                  .objective;
          out.failed = false;
          out.hit = truth.value >= lo && truth.value <= hi;
          out.width = hi - lo;
        } catch (const Error&) {
        }
      }
    }
  };

  const std::size_t nthreads =
      std::min(resolve_threads(config.threads), config.reps);
  if (nthreads <= 1) {
    for (std::size_t r = 0; r < config.reps; ++r) run_rep(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t r = next.fetch_add(1);
          if (r >= config.reps) return;
          run_rep(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  CoverageReport report;
  report.config = config;
  report.truth = truth;
  std::size_t cell = 0;
  for (std::size_t mi = 0; mi < kinds.size(); ++mi) {
    for (double level : config.nominal_levels) {
      CoverageCell c;
      c.method = config.methods[mi];
      c.level = level;
      std::size_t hits = 0, valid = 0;
      double width_sum = 0.0;
      for (std::size_t r = 0; r < config.reps; ++r) {
        const CellOutcome& o = outcomes[r][cell];
        if (o.failed) {
          ++c.failures;
          continue;
        }
        ++valid;
        hits += o.hit ? 1 : 0;
        width_sum += o.width;
      }
      c.reps_completed = valid;
      if (valid > 0) {
        c.coverage = double(hits) / double(valid);
        c.half_width =
            1.96 * std::sqrt(c.coverage * (1.0 - c.coverage) / double(valid));
        c.mean_width = width_sum / double(valid);
      }
      report.cells.push_back(std::move(c));
      ++cell;
    }
  }
  return report;
}

}  // namespace droci
