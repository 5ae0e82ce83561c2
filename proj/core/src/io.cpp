#include "droci/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "droci/errors.hpp"

namespace droci {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

}  // namespace

Sample parse_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  std::vector<double> data;
  std::size_t nrows = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      ncols = split_fields(line).size();
      if (ncols == 0 || line.empty())
        throw ParseError(1, 1, "empty header row");
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != ncols)
      throw ParseError(lineno, fields.size(),
                       "expected " + std::to_string(ncols) + " columns");
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string cell = trim(fields[c]);
      double v = 0.0;
      const auto* begin = cell.data();
      const auto* end = begin + cell.size();
      const auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(lineno, c + 1, "not a number: '" + cell + "'");
      data.push_back(v);
    }
    ++nrows;
  }
  if (nrows == 0) throw EmptyData("no data rows after the header");
  return Sample(std::move(data), nrows, ncols);
}

Sample parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str());
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json j{
      {"model", c.model},
      {"divergence", c.divergence},
      {"data_law", c.data_law},
      {"n", c.n},
      {"nominal_levels", c.nominal_levels},
      {"methods", c.methods},
      {"reps", c.reps},
      {"base_seed", c.base_seed},
      {"oracle_reps", c.oracle_reps},
      {"truth_pairs", c.truth_pairs},
      {"threads", c.threads},
  };
  if (c.truth_analytic) j["truth"] = *c.truth_analytic;
  return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    j.at("model").get_to(c.model);
    j.at("divergence").get_to(c.divergence);
    j.at("data_law").get_to(c.data_law);
    j.at("n").get_to(c.n);
    j.at("nominal_levels").get_to(c.nominal_levels);
    j.at("methods").get_to(c.methods);
    if (j.contains("reps")) j.at("reps").get_to(c.reps);
    if (j.contains("base_seed")) j.at("base_seed").get_to(c.base_seed);
    if (j.contains("oracle_reps")) j.at("oracle_reps").get_to(c.oracle_reps);
    if (j.contains("truth_pairs")) j.at("truth_pairs").get_to(c.truth_pairs);
    if (j.contains("threads")) j.at("threads").get_to(c.threads);
    if (j.contains("truth")) c.truth_analytic = j.at("truth").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  }
  return c;
}

nlohmann::json report_to_json(const CoverageReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"method", c.method},
                     {"level", c.level},
                     {"coverage", c.coverage},
                     {"half_width", c.half_width},
                     {"mean_width", c.mean_width},
                     {"failures", c.failures},
                     {"reps_completed", c.reps_completed}});
  }
  return nlohmann::json{
      {"config", scenario_to_json(r.config)},
      {"truth", {{"value", r.truth.value}, {"se", r.truth.se}}},
      {"cells", cells}};
}

CoverageReport report_from_json(const nlohmann::json& j) {
  CoverageReport r;
  try {
    r.config = scenario_from_json(j.at("config"));
    j.at("truth").at("value").get_to(r.truth.value);
    j.at("truth").at("se").get_to(r.truth.se);
    for (const auto& jc : j.at("cells")) {
      CoverageCell c;
      jc.at("method").get_to(c.method);
      jc.at("level").get_to(c.level);
      jc.at("coverage").get_to(c.coverage);
      jc.at("half_width").get_to(c.half_width);
      jc.at("mean_width").get_to(c.mean_width);
      jc.at("failures").get_to(c.failures);
      jc.at("reps_completed").get_to(c.reps_completed);
      r.cells.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad coverage report: ") + e.what());
  }
  return r;
}

std::string report_to_csv(const CoverageReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "method,level,coverage,half_width,mean_width,failures\n";
  for (const auto& c : r.cells) {
    out << c.method << ',' << c.level << ',' << c.coverage << ','
        << c.half_width << ',' << c.mean_width << ',' << c.failures << '\n';
  }
  return out.str();
}

}  // namespace droci
