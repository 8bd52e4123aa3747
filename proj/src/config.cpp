#include "skinf/config.hpp"

#include <cmath>
#include <set>
#include <vector>

namespace skinf {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment", "data_seed", "algorithm", "N",     "N1",      "iters",   "burn_in",
      "lambda",     "tau",       "dt_max",    "rtol",  "seed",    "workers", "output_dir",
      "pilot",      "proposal_covariance",    "initial_log_params", "d_eff", "density"};
  return keys;
}

template <class T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: key '") + key + "' has the wrong type");
  }
}

std::uint64_t get_u64(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError(std::string("config: key '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_positive(const json& doc, const char* key) {
  if (!doc.at(key).is_number()) throw ConfigError(std::string("config: key '") + key + "' must be a number");
  const double v = doc.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("config: key '") + key + "' must be positive");
  return v;
}

int get_count(const json& doc, const char* key) {
  if (!doc.at(key).is_number_integer()) throw ConfigError(std::string("config: key '") + key + "' must be an integer");
  const long long v = doc.at(key).get<long long>();
  if (v < 1 || v > 100'000'000) throw ConfigError(std::string("config: key '") + key + "' must be a positive integer");
  return static_cast<int>(v);
}

Eigen::VectorXd to_vector(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) throw ConfigError(std::string("config: key '") + key + "' must be a numeric array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(std::string("config: key '") + key + "' must be a numeric array");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd to_matrix(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) throw ConfigError(std::string("config: key '") + key + "' must be a square matrix");
  const auto d = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::VectorXd row = to_vector(v[static_cast<std::size_t>(i)], key);
    if (row.size() != d) throw ConfigError(std::string("config: key '") + key + "' must be a square matrix");
    out.row(i) = row.transpose();
  }
  return out;
}

json from_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Pmmh: return "pmmh";
    case Algorithm::DapmmhLna: return "dapmmh-lna";
    case Algorithm::DapmmhCle: return "dapmmh-cle";
  }
  return "pmmh";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "pmmh") return Algorithm::Pmmh;
  if (s == "dapmmh-lna") return Algorithm::DapmmhLna;
  if (s == "dapmmh-cle") return Algorithm::DapmmhCle;
  throw ConfigError("config: unknown algorithm '" + s + "' (expected pmmh, dapmmh-lna or dapmmh-cle)");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  std::vector<std::string> unknown;
  for (const auto& [k, _] : doc.items())
    if (!known_keys().count(k)) unknown.push_back(k);
  if (!unknown.empty()) {
    std::string msg = "config: unknown key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ConfigError(msg);
  }
  std::vector<std::string> missing;
  for (const char* k : {"experiment", "algorithm", "iters", "seed"})
    if (!doc.contains(k)) missing.push_back(k);
  if (doc.contains("algorithm") && doc.at("algorithm").is_string() &&
      doc.at("algorithm").get<std::string>() == "dapmmh-cle" && !doc.contains("dt_max"))
    missing.push_back("dt_max");
  if (!missing.empty()) {
    std::string msg = "config: missing required key(s):";
    for (const auto& k : missing) msg += " '" + k + "'";
    throw ConfigError(msg);
  }

  RunConfig c;
  c.experiment = get_as<std::string>(doc, "experiment");
  if (c.experiment.empty()) throw ConfigError("config: 'experiment' must not be empty");
  c.algorithm = parse_algorithm(get_as<std::string>(doc, "algorithm"));
  c.iterations = get_count(doc, "iters");
  c.seed = get_u64(doc, "seed");
  if (doc.contains("data_seed")) c.data_seed = get_u64(doc, "data_seed");
  if (doc.contains("N")) c.num_particles = get_count(doc, "N");
  if (doc.contains("burn_in")) {
    c.burn_in = get_as<double>(doc, "burn_in");
    if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) throw ConfigError("config: 'burn_in' must be in [0, 1)");
  }
  if (doc.contains("lambda")) c.lambda = get_positive(doc, "lambda");
  if (doc.contains("rtol")) c.rtol = get_positive(doc, "rtol");
  if (doc.contains("workers")) c.workers = get_count(doc, "workers");
  if (doc.contains("output_dir")) c.output_dir = get_as<std::string>(doc, "output_dir");
  if (doc.contains("pilot")) c.pilot = get_as<std::string>(doc, "pilot");
  if (doc.contains("d_eff")) c.d_eff = get_positive(doc, "d_eff");
  if (doc.contains("density")) c.density = get_as<bool>(doc, "density");
  if (doc.contains("proposal_covariance"))
    c.proposal_covariance = to_matrix(doc.at("proposal_covariance"), "proposal_covariance");
  if (doc.contains("initial_log_params"))
    c.initial_log_params = to_vector(doc.at("initial_log_params"), "initial_log_params");
  if (c.pilot && c.proposal_covariance)
    throw ConfigError("config: give either 'pilot' or 'proposal_covariance', not both");

  if (doc.contains("tau")) {
    if (c.algorithm != Algorithm::DapmmhLna) throw ConfigError("config: 'tau' applies only to dapmmh-lna");
    c.tau = get_as<double>(doc, "tau");
    if (!(c.tau >= 1.0) || !std::isfinite(c.tau)) throw ConfigError("config: 'tau' must be at least 1");
  }
  if (doc.contains("dt_max")) {
    if (c.algorithm != Algorithm::DapmmhCle) throw ConfigError("config: 'dt_max' applies only to dapmmh-cle");
    c.dt_max = get_positive(doc, "dt_max");
  }
  if (doc.contains("N1")) {
    if (c.algorithm != Algorithm::DapmmhCle) throw ConfigError("config: 'N1' applies only to dapmmh-cle");
    c.surrogate_particles = get_count(doc, "N1");
  }
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  if (data_seed) j["data_seed"] = *data_seed;
  j["algorithm"] = to_string(algorithm);
  if (num_particles) j["N"] = *num_particles;
  if (surrogate_particles) j["N1"] = *surrogate_particles;
  j["iters"] = iterations;
  j["burn_in"] = burn_in;
  if (lambda) j["lambda"] = *lambda;
  if (algorithm == Algorithm::DapmmhLna) j["tau"] = tau;
  if (dt_max) j["dt_max"] = *dt_max;
  j["rtol"] = rtol;
  j["seed"] = seed;
  j["workers"] = workers;
  j["output_dir"] = output_dir;
  if (pilot) j["pilot"] = *pilot;
  if (proposal_covariance) {
    json m = json::array();
    for (Eigen::Index i = 0; i < proposal_covariance->rows(); ++i)
      m.push_back(from_vector(proposal_covariance->row(i).transpose()));
    j["proposal_covariance"] = m;
  }
  if (initial_log_params) j["initial_log_params"] = from_vector(*initial_log_params);
  if (d_eff) j["d_eff"] = *d_eff;
  j["density"] = density;
  return j;
}

}  // namespace skinf
