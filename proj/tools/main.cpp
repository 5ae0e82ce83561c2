#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "droci/correction.hpp"
#include "droci/divergence.hpp"
#include "droci/dro.hpp"
#include "droci/errors.hpp"
#include "droci/experiments.hpp"
#include "droci/io.hpp"
#include "droci/moments.hpp"

namespace {

using nlohmann::json;

int cmd_check_divergence(const std::string& name) {
  const droci::DivergenceSpec spec = droci::parse_divergence(name);
  json out{{"name", spec.name},
           {"d2", spec.d2_at_1},
           {"d3", spec.d3_at_1},
           {"d4", spec.d4_at_1},
           {"bartlett_correctable", droci::is_bartlett_correctable(spec)}};
  if (spec.lambda) out["lambda"] = *spec.lambda;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_solve(const std::string& data_path, const std::string& model_spec,
              const std::string& divergence, double q,
              const std::string& direction) {
  const droci::Sample sample = droci::parse_csv(data_path);
  const droci::InfluenceModel model = droci::build_model(model_spec, sample);
  const droci::DivergenceSpec spec = droci::parse_divergence(divergence);
  const droci::Direction dir = direction == "max" ? droci::Direction::Max
                                                  : droci::Direction::Min;
  const droci::LikelihoodRatioSolution sol =
      droci::solve_dro_exact(model, sample, spec, q, dir);
  json out{{"objective", sol.objective},
           {"alpha_tilde", sol.alpha_tilde},
           {"beta", sol.beta},
           {"residual_divergence", sol.residual_divergence},
           {"residual_mean", sol.residual_mean},
           {"iterations", sol.iterations}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_ci(const std::string& data_path, const std::string& model_spec,
           const std::string& divergence, double level,
           const std::string& method, const std::string& oracle_path,
           const std::string& solver_name) {
  const droci::Sample sample = droci::parse_csv(data_path);
  const droci::InfluenceModel model = droci::build_model(model_spec, sample);
  const droci::DivergenceSpec spec = droci::parse_divergence(divergence);

  droci::BallSizeRule rule;
  rule.kind = droci::parse_rule_kind(method);
  rule.nominal = level;
  if (rule.kind == droci::RuleKind::BartlettTheoretical ||
      rule.kind == droci::RuleKind::BartlettDicc) {
    if (oracle_path.empty())
      throw droci::ConfigError("method " + method + " requires --oracle-data");
    const droci::Sample oracle = droci::parse_csv(oracle_path);
    if (rule.kind == droci::RuleKind::BartlettTheoretical) {
      const droci::InfluenceModel omodel =
          droci::build_model(model_spec, oracle);
      rule.oracle_moments = droci::estimate_moments(omodel, oracle);
    } else {
      const auto colon = model_spec.find(':');
      if (model_spec.substr(0, colon) != "smooth")
        throw droci::ConfigError("tb2 applies to smooth-function models only");
      rule.oracle_smooth = droci::standardize_smooth(
          droci::lookup_smooth(model_spec.substr(colon + 1)), oracle);
    }
  }
  const droci::SolverChoice solver = solver_name == "expansion"
                                         ? droci::SolverChoice::Expansion
                                         : droci::SolverChoice::Exact;
  const droci::CIResult ci =
      droci::confidence_interval(model, sample, spec, rule, solver);
  json out{{"lower", ci.lower},       {"upper", ci.upper},
           {"q_used", ci.q_used},     {"method", ci.method},
           {"solver", ci.solver},     {"warnings", ci.warnings}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_coverage(const std::string& config_path, std::optional<std::size_t> reps,
                 std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> threads, const std::string& out) {
  std::ifstream in(config_path);
  if (!in) throw droci::ConfigError("cannot open config: " + config_path);
  json jc;
  try {
    in >> jc;
  } catch (const json::exception& e) {
    throw droci::ConfigError(std::string("bad config JSON: ") + e.what());
  }
  droci::ScenarioConfig config = droci::scenario_from_json(jc);
  if (reps) config.reps = *reps;
  if (seed) config.base_seed = *seed;
  if (threads) config.threads = *threads;
  const droci::CoverageReport report = droci::run_coverage(config);
  if (out == "csv")
    std::cout << droci::report_to_csv(report);
  else
    std::cout << droci::report_to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi-divergence-ball confidence intervals for nonparametric "
               "functionals"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand(
      "check-divergence", "Print a divergence's derivative triple and whether "
                          "it is Bartlett correctable");
  std::string div_name;
  check->add_option("divergence", div_name, "kl | reverse-kl | chi2 | cressie-read:<lambda>")
      ->required();

  auto* solve = app.add_subcommand(
      "solve", "Solve one DRO direction at a fixed ball size");
  std::string s_data, s_model, s_div = "reverse-kl", s_dir = "max";
  double s_q = 1.0;
  solve->add_option("--data", s_data, "CSV data file")->required();
  solve->add_option("--model", s_model, "smooth:<f> | vstat:<k> | optim:<l>")
      ->required();
  solve->add_option("--divergence", s_div, "divergence name");
  solve->add_option("--q", s_q, "ball size parameter q (radius q/(2n))")
      ->required();
  solve->add_option("--direction", s_dir)
      ->check(CLI::IsMember({"max", "min"}));

  auto* ci = app.add_subcommand("ci", "Two-sided confidence interval");
  std::string c_data, c_model, c_div = "reverse-kl", c_method = "el";
  std::string c_oracle, c_solver = "exact";
  double c_level = 0.95;
  ci->add_option("--data", c_data, "CSV data file")->required();
  ci->add_option("--model", c_model, "smooth:<f> | vstat:<k> | optim:<l>")
      ->required();
  ci->add_option("--divergence", c_div, "divergence name");
  ci->add_option("--level", c_level, "nominal coverage in (0,1)")->required();
  ci->add_option("--method", c_method)
      ->check(CLI::IsMember({"el", "eb", "tb", "tb2"}));
  ci->add_option("--oracle-data", c_oracle,
                 "CSV oracle sample (required for tb/tb2)");
  ci->add_option("--solver", c_solver)
      ->check(CLI::IsMember({"exact", "expansion"}));

  auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage study");
  std::string v_config, v_out = "json";
  std::optional<std::size_t> v_reps, v_threads;
  std::optional<std::uint64_t> v_seed;
  cov->add_option("--config", v_config, "scenario config JSON")->required();
  cov->add_option("--reps", v_reps, "override replication count");
  cov->add_option("--seed", v_seed, "override base seed");
  cov->add_option("--threads", v_threads, "override worker count");
  cov->add_option("--out", v_out, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
    if (*check) return cmd_check_divergence(div_name);
    if (*solve) return cmd_solve(s_data, s_model, s_div, s_q, s_dir);
    if (*ci) return cmd_ci(c_data, c_model, c_div, c_level, c_method, c_oracle,
                           c_solver);
    if (*cov) return cmd_coverage(v_config, v_reps, v_seed, v_threads, v_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const droci::UnknownDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const droci::DegenerateCressieReadParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const droci::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const droci::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
