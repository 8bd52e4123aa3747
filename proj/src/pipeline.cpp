#include "skinf/pipeline.hpp"

#include "skinf/cle.hpp"
#include "skinf/diagnostics.hpp"
#include "skinf/serialize.hpp"
#include "skinf/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace skinf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw std::invalid_argument("pilot: need at least two post-burn-in samples");
  const Eigen::RowVectorXd m = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - m;
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("output directory '" + dir + "' cannot be created");
}

ExperimentBundle load_for(const RunConfig& cfg) { return load_experiment(cfg.experiment, cfg.data_seed); }

}  // namespace

ExperimentBundle load_experiment(const std::string& experiment, std::optional<std::uint64_t> data_seed) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), experiment) != names.end()) return builtin_bundle(experiment, data_seed);
  if (data_seed) throw std::invalid_argument("data_seed applies only to built-in experiments");
  if (!fs::exists(experiment))
    throw std::invalid_argument("experiment '" + experiment + "' is neither a built-in name nor an existing file");
  return bundle_from_json(json::parse(read_text_file(experiment)));
}

json PilotSummary::to_json() const {
  json cov = json::array();
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) cov.push_back(vec_json(covariance.row(i).transpose()));
  return {{"param_names", param_names}, {"mean_log_params", vec_json(mean_log_params)},
          {"covariance", cov},          {"iterations", iterations},
          {"N", num_particles},         {"alpha1", alpha1}};
}

PilotSummary PilotSummary::from_json(const json& j) {
  try {
    PilotSummary p;
    p.param_names = j.at("param_names").get<std::vector<std::string>>();
    p.mean_log_params = json_vec(j.at("mean_log_params"));
    const auto& cov = j.at("covariance");
    const auto d = static_cast<Eigen::Index>(cov.size());
    p.covariance.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::VectorXd row = json_vec(cov[static_cast<std::size_t>(i)]);
      if (row.size() != d) throw std::invalid_argument("pilot: covariance must be square");
      p.covariance.row(i) = row.transpose();
    }
    if (p.mean_log_params.size() != d || static_cast<Eigen::Index>(p.param_names.size()) != d)
      throw std::invalid_argument("pilot: inconsistent dimensions");
    p.iterations = j.value("iterations", 0L);
    p.num_particles = j.value("N", 0);
    p.alpha1 = j.value("alpha1", 0.0);
    return p;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("pilot: malformed file: ") + e.what());
  }
}

PilotSummary summarize_pilot(const RunReport& report, const std::vector<std::string>& names, int num_particles) {
  const Eigen::MatrixXd post = report.post_burn_in();
  PilotSummary p;
  p.param_names = names;
  p.mean_log_params = post.colwise().mean().transpose();
  p.covariance = sample_covariance(post);
  p.iterations = report.iterations;
  p.num_particles = num_particles;
  p.alpha1 = report.alpha1;
  return p;
}

ResolvedRun resolve(const RunConfig& cfg, const ExperimentBundle& bundle) {
  const int d = bundle.dim();
  const auto& df = bundle.defaults;
  ResolvedRun r;
  r.num_particles = cfg.num_particles.value_or(df.num_particles);
  r.surrogate_particles = cfg.surrogate_particles.value_or(r.num_particles);
  switch (cfg.algorithm) {
    case Algorithm::Pmmh: r.lambda = cfg.lambda.value_or(df.lambda_pmmh); break;
    case Algorithm::DapmmhLna: r.lambda = cfg.lambda.value_or(df.lambda_dapmmh_lna); break;
    case Algorithm::DapmmhCle: r.lambda = cfg.lambda.value_or(df.lambda_dapmmh_cle); break;
  }
  r.d_eff = cfg.d_eff.value_or(df.d_eff);

  std::optional<PilotSummary> pilot;
  if (cfg.pilot) {
    pilot = PilotSummary::from_json(json::parse(read_text_file(*cfg.pilot)));
    if (pilot->param_names != bundle.network.param_names())
      throw std::invalid_argument("pilot file parameters do not match the experiment");
  }
  Eigen::MatrixXd cov;
  if (cfg.proposal_covariance) cov = *cfg.proposal_covariance;
  else if (pilot) cov = pilot->covariance;
  else cov = bundle.pilot_sd.array().square().matrix().asDiagonal();
  if (cov.rows() != d || cov.cols() != d) throw std::invalid_argument("proposal covariance has the wrong dimension");
  r.proposal = ProposalSpec{r.lambda, cov, r.d_eff};

  if (cfg.initial_log_params) r.init = *cfg.initial_log_params;
  else if (pilot) r.init = pilot->mean_log_params;
  else r.init = bundle.initial_params.array().log().matrix();
  if (r.init.size() != d) throw std::invalid_argument("initial parameters have the wrong dimension");
  return r;
}

namespace {

RunReport execute_resolved(const RunConfig& cfg, const ExperimentBundle& bundle, const ResolvedRun& r) {
  const LogPriorFn prior = make_log_prior(bundle);
  const LogLikelihoodFn exact = make_mjp_estimator(bundle, r.num_particles, cfg.workers);
  const GaussianRandomWalk rw(r.proposal);
  const ProposalFn prop = [rw](const Eigen::VectorXd& x, Rng& g) { return rw(x, g); };
  const ChainOptions opts{cfg.iterations, cfg.seed, cfg.burn_in};
  switch (cfg.algorithm) {
    case Algorithm::Pmmh:
      return pmmh_run(exact, prior, prop, r.init, opts);
    case Algorithm::DapmmhLna: {
      OdeTolerances tol;
      tol.rtol = cfg.rtol;
      auto rep = dapmmh_run(exact, make_lna_surrogate(bundle, cfg.tau, tol), prior, prop, r.init, opts);
      rep.algorithm = "dapmmh-lna";
      return rep;
    }
    case Algorithm::DapmmhCle: {
      if (!cfg.dt_max) throw ConfigError("config: missing required key(s): 'dt_max'");
      auto rep = dapmmh_run(exact, make_cle_estimator(bundle, r.surrogate_particles, *cfg.dt_max, cfg.workers),
                            prior, prop, r.init, opts);
      rep.algorithm = "dapmmh-cle";
      return rep;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

RunReport execute(const RunConfig& cfg, const ExperimentBundle& bundle) {
  return execute_resolved(cfg, bundle, resolve(cfg, bundle));
}

json report_json(const RunReport& rep, const RunConfig& cfg, const ExperimentBundle& bundle, const ResolvedRun& r) {
  const auto& names = bundle.network.param_names();
  const Eigen::MatrixXd post = rep.post_burn_in();
  json ess = json::object();
  json mean_log = json::object();
  for (std::size_t j = 0; j < names.size(); ++j) {
    ess[names[j]] = rep.ess_per_param[static_cast<Eigen::Index>(j)];
    mean_log[names[j]] = post.col(static_cast<Eigen::Index>(j)).mean();
  }
  json j;
  j["experiment"] = bundle.name;
  j["algorithm"] = rep.algorithm;
  j["seed"] = cfg.seed;
  j["iterations"] = rep.iterations;
  j["burn_in_rows"] = rep.burn_in_rows;
  j["alpha1"] = rep.alpha1;
  j["alpha2_given_1"] = rep.alpha2_given_1;
  j["stage1_accepts"] = rep.stage1_accepts;
  j["stage2_invocations"] = rep.stage2_invocations;
  j["accepted"] = rep.accepted;
  j["exact_filter_calls"] = rep.exact_calls;
  j["surrogate_calls"] = rep.surrogate_calls;
  j["ess"] = ess;
  j["ess_min"] = rep.ess_per_param.size() ? rep.ess_per_param.minCoeff() : 0.0;
  j["posterior_mean_log"] = mean_log;
  j["wall_time_seconds"] = rep.wall_time;
  j["resolved"] = {{"N", r.num_particles},
                   {"N1", r.surrogate_particles},
                   {"lambda", r.lambda},
                   {"d_eff", r.d_eff},
                   {"initial_log_params", vec_json(r.init)}};
  j["config"] = cfg.to_json();
  return j;
}

namespace {

void write_all(const RunConfig& cfg, const ExperimentBundle& bundle, const RunReport& rep, const ResolvedRun& r) {
  ensure_dir(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  const auto& names = bundle.network.param_names();
  write_text_file((dir / "samples.csv").string(), to_csv({names, rep.post_burn_in()}));

  Eigen::MatrixXd tr(static_cast<Eigen::Index>(rep.trace.size()), 4);
  for (std::size_t i = 0; i < rep.trace.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    tr(k, 0) = static_cast<double>(i + 1);
    tr(k, 1) = rep.trace[i].log_ml_exact;
    tr(k, 2) = rep.trace[i].log_ml_surrogate;
    tr(k, 3) = static_cast<double>(static_cast<int>(rep.trace[i].outcome));
  }
  write_text_file((dir / "trace.csv").string(),
                  to_csv({{"iteration", "log_ml_exact", "log_ml_surrogate", "outcome"}, tr}));
  write_text_file((dir / "report.json").string(), report_json(rep, cfg, bundle, r).dump(2) + "\n");

  if (cfg.density) {
    const Eigen::MatrixXd post = rep.post_burn_in();
    constexpr int kPoints = 256;
    std::vector<std::string> header;
    Eigen::MatrixXd dens(kPoints, 2 * post.cols());
    for (Eigen::Index j = 0; j < post.cols(); ++j) {
      const Eigen::VectorXd col = post.col(j);
      DensityGrid g;
      if (col.minCoeff() < col.maxCoeff()) {
        g = kernel_density({col.data(), static_cast<std::size_t>(col.size())}, kPoints);
      } else {
        g.grid.assign(kPoints, col[0]);
        g.density.assign(kPoints, 0.0);
      }
      for (int p = 0; p < kPoints; ++p) {
        dens(p, 2 * j) = g.grid[static_cast<std::size_t>(p)];
        dens(p, 2 * j + 1) = g.density[static_cast<std::size_t>(p)];
      }
      header.push_back(names[static_cast<std::size_t>(j)] + "_grid");
      header.push_back(names[static_cast<std::size_t>(j)] + "_density");
    }
    write_text_file((dir / "density.csv").string(), to_csv({header, dens}));
  }
}

}  // namespace

void write_outputs(const RunConfig& cfg, const ExperimentBundle& bundle, const RunReport& report) {
  write_all(cfg, bundle, report, resolve(cfg, bundle));
}

RunReport run(const RunConfig& cfg) {
  const ExperimentBundle bundle = load_for(cfg);
  const ResolvedRun r = resolve(cfg, bundle);
  ensure_dir(cfg.output_dir);
  RunReport rep = execute_resolved(cfg, bundle, r);
  write_all(cfg, bundle, rep, r);
  return rep;
}

PilotSummary run_pilot(const RunConfig& cfg) {
  const ExperimentBundle bundle = load_for(cfg);
  RunConfig pc = cfg;
  if (!pc.num_particles) pc.num_particles = bundle.defaults.pilot_particles;
  const ResolvedRun r = resolve(pc, bundle);
  ensure_dir(pc.output_dir);
  const RunReport rep = execute_resolved(pc, bundle, r);
  write_all(pc, bundle, rep, r);
  PilotSummary s = summarize_pilot(rep, bundle.network.param_names(), r.num_particles);
  write_text_file((fs::path(pc.output_dir) / "pilot.json").string(), s.to_json().dump(2) + "\n");
  return s;
}

ParticleTuneResult run_tune(const RunConfig& cfg, const std::vector<int>& candidates, int reps) {
  const ExperimentBundle bundle = load_for(cfg);
  const ResolvedRun r = resolve(cfg, bundle);
  const int workers = cfg.workers;
  const EstimatorFactory factory = [&bundle, workers](int n) { return make_mjp_estimator(bundle, n, workers); };
  ParticleTuneResult res = pilot_tune_particles(factory, r.init, candidates, reps, cfg.seed);
  ensure_dir(cfg.output_dir);
  json table = json::array();
  for (const auto& row : res.table)
    table.push_back({{"N", row.num_particles}, {"mean", row.mean}, {"variance", row.variance}});
  json j = {{"experiment", bundle.name}, {"log_params", vec_json(r.init)}, {"reps", reps},   {"seed", cfg.seed},
            {"table", table},            {"chosen_N", res.chosen},        {"warning", res.warning}};
  if (res.warning) j["message"] = res.message;
  write_text_file((fs::path(cfg.output_dir) / "tune.json").string(), j.dump(2) + "\n");
  return res;
}

CsvTable simulate_trajectories(const ExperimentBundle& bundle, const Eigen::VectorXd& params, SimMethod method,
                               double t_end, double step, int replicates, std::uint64_t seed, double dt_max) {
  if (!(step > 0.0)) throw std::invalid_argument("simulate: step must be positive");
  if (replicates < 1) throw std::invalid_argument("simulate: need at least one replicate");
  const double t0 = bundle.data.times.front();
  if (!(t_end >= t0)) throw std::invalid_argument("simulate: end time precedes the initial time");
  const ParamVector c = ParamVector::from_values(params);
  const auto& net = bundle.network;
  const int u = net.num_species();
  const auto steps = static_cast<long>(std::floor((t_end - t0) / step + 1e-9));
  CsvTable out;
  out.header = {"time", "replicate"};
  for (const auto& s : net.species_names()) out.header.push_back(s);
  out.values.resize((steps + 1) * replicates, 2 + u);
  SsaOptions so;
  so.record_events = false;
  Eigen::Index row = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    Rng rng(derive_key(seed, {static_cast<std::uint64_t>(rep)}));
    Vector x = bundle.x1;
    double t = t0;
    for (long k = 0; k <= steps; ++k) {
      const double tk = t0 + step * static_cast<double>(k);
      if (k > 0) {
        if (method == SimMethod::Ssa) ssa_advance(net, x, c, t, tk, rng, so);
        else x = cle_simulate(net, x, c, t, tk, dt_max, rng).x;
      }
      t = tk;
      out.values(row, 0) = tk;
      out.values(row, 1) = rep;
      out.values.block(row, 2, 1, u) = x.transpose();
      ++row;
    }
  }
  return out;
}

json diagnose(const CsvTable& samples, const std::optional<CsvTable>& trace) {
  json params = json::object();
  double ess_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < samples.values.cols(); ++j) {
    const Eigen::VectorXd col = samples.values.col(j);
    const std::span<const double> s(col.data(), static_cast<std::size_t>(col.size()));
    const std::vector<double> v(s.begin(), s.end());
    const double e = ess(s);
    ess_min = std::min(ess_min, e);
    params[samples.header[static_cast<std::size_t>(j)]] = {
        {"mean", mean(s)},           {"sd", std::sqrt(sample_variance(s))}, {"q025", quantile(v, 0.025)},
        {"median", quantile(v, 0.5)}, {"q975", quantile(v, 0.975)},          {"ess", e}};
  }
  json j = {{"rows", samples.values.rows()}, {"params", params}, {"ess_min", ess_min}};
  if (trace) {
    const auto n = trace->values.rows();
    long s1 = 0, acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int o = static_cast<int>(trace->values(i, 3));
      if (o == static_cast<int>(StepOutcome::Stage2Reject) || o == static_cast<int>(StepOutcome::Accept)) ++s1;
      if (o == static_cast<int>(StepOutcome::Accept)) ++acc;
    }
    j["iterations"] = n;
    j["alpha1"] = n ? static_cast<double>(s1) / static_cast<double>(n) : 0.0;
    j["alpha2_given_1"] = s1 ? static_cast<double>(acc) / static_cast<double>(s1) : 0.0;
    j["accepted"] = acc;
  }
  return j;
}

}  // namespace skinf
