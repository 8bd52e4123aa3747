#include "skinf/config.hpp"
#include "skinf/pipeline.hpp"
#include "skinf/serialize.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>

using namespace skinf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skinf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_lv(Algorithm alg, const fs::path& out) {
  RunConfig c;
  c.experiment = "lotka-volterra";
  c.algorithm = alg;
  c.num_particles = 50;
  c.iterations = 10;
  c.seed = 1;
  c.output_dir = out.string();
  return c;
}

struct Shell {
  int code;
  std::string out, err;
};

Shell shell(const std::string& args, const fs::path& dir) {
  const std::string out = (dir / "stdout.txt").string(), err = (dir / "stderr.txt").string();
  const std::string cmd = std::string(SKINF_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
  const int status = std::system(cmd.c_str());
  Shell s;
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  s.out = read_text_file(out);
  s.err = read_text_file(err);
  return s;
}

}  // namespace

TEST_CASE("configuration parsing") {
  SUBCASE("minimal config") {
    const auto c = parse_config(R"({"experiment":"lotka-volterra","algorithm":"pmmh","N":200,"iters":1000,"seed":1})");
    CHECK(c.experiment == "lotka-volterra");
    CHECK(c.algorithm == Algorithm::Pmmh);
    CHECK(c.num_particles == 200);
    CHECK(c.iterations == 1000);
    CHECK(c.seed == 1u);
    CHECK(c.burn_in == 0.1);
    CHECK(c.workers == 1);
  }
  SUBCASE("tau defaults to one") {
    const auto c = parse_config(R"({"experiment":"lotka-volterra","algorithm":"dapmmh-lna","iters":10,"seed":1})");
    CHECK(c.tau == 1.0);
  }
  SUBCASE("CLE surrogate needs dt_max") {
    try {
      parse_config(R"({"experiment":"lotka-volterra","algorithm":"dapmmh-cle","iters":10,"seed":1})");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("dt_max") != std::string::npos);
    }
  }
  SUBCASE("missing keys are listed") {
    try {
      parse_config(R"({"algorithm":"pmmh"})");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      for (const char* k : {"experiment", "iters", "seed"}) CHECK(what.find(k) != std::string::npos);
    }
  }
  SUBCASE("inconsistent or unknown keys") {
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"pmmh","iters":1,"seed":1,"bogus":3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"pmmh","iters":1,"seed":1,"tau":2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"dapmmh-lna","iters":1,"seed":1,"tau":0.5})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"mh","iters":1,"seed":1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"pmmh","iters":0,"seed":1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"pmmh","iters":1,"seed":1,"burn_in":1.0})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment":"x","algorithm":"pmmh","iters":1,"seed":1,"pilot":"p.json",)"
                                 R"("proposal_covariance":[[1]]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  }
  SUBCASE("round trip through JSON") {
    const auto c = parse_config(R"({"experiment":"abakaliki","algorithm":"dapmmh-lna","iters":50,"seed":7,"tau":5,)"
                                R"("lambda":1.1,"N":300,"proposal_covariance":[[0.1,0.01],[0.01,0.2]],)"
                                R"("initial_log_params":[-7,-2.3],"density":true})");
    const auto back = parse_config(c.to_json());
    CHECK(back.to_json().dump() == c.to_json().dump());
    CHECK(back.proposal_covariance.value()(1, 0) == 0.01);
  }
}

TEST_CASE("numbers survive text serialization exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::exp(u(rng)) * (k % 2 ? -1.0 : 1.0);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CsvTable t{{"a", "b"}, Eigen::MatrixXd(2, 2)};
  t.values << 0.1, -std::numeric_limits<double>::infinity(), 1e-300, 12345.678;
  const auto back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.values == t.values);
}

TEST_CASE("a ten-iteration PMMH run makes eleven filter calls") {
  const auto out = scratch("pmmh_calls");
  const auto cfg = small_lv(Algorithm::Pmmh, out);
  const auto rep = run(cfg);
  CHECK(rep.exact_calls == 11);
  const auto report = json::parse(read_text_file((out / "report.json").string()));
  CHECK(report.at("exact_filter_calls").get<long>() == 11);
  CHECK(report.at("config").at("seed").get<std::uint64_t>() == 1u);
  CHECK(fs::exists(out / "samples.csv"));
  CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("identical configurations give byte-identical samples") {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  auto ca = small_lv(Algorithm::DapmmhLna, a);
  auto cb = small_lv(Algorithm::DapmmhLna, b);
  ca.iterations = cb.iterations = 30;
  cb.workers = 3;
  run(ca);
  run(cb);
  CHECK(read_text_file((a / "samples.csv").string()) == read_text_file((b / "samples.csv").string()));
  CHECK(read_text_file((a / "trace.csv").string()) == read_text_file((b / "trace.csv").string()));
}

TEST_CASE("written outputs match the in-memory chain") {
  const auto out = scratch("roundtrip");
  auto cfg = small_lv(Algorithm::DapmmhLna, out);
  cfg.iterations = 40;
  cfg.density = true;
  const auto bundle = load_experiment(cfg.experiment);
  const auto rep = execute(cfg, bundle);
  write_outputs(cfg, bundle, rep);
  const auto samples = parse_csv(read_text_file((out / "samples.csv").string()));
  CHECK(samples.header == bundle.network.param_names());
  CHECK(samples.values == rep.post_burn_in());
  const auto trace = parse_csv(read_text_file((out / "trace.csv").string()));
  REQUIRE(trace.values.rows() == rep.iterations);
  for (Eigen::Index i = 0; i < trace.values.rows(); ++i) {
    CHECK(trace.values(i, 1) == rep.trace[static_cast<std::size_t>(i)].log_ml_exact);
    CHECK(trace.values(i, 3) == static_cast<double>(rep.trace[static_cast<std::size_t>(i)].outcome));
  }
  const auto report = json::parse(read_text_file((out / "report.json").string()));
  const long s2 = report.at("stage2_invocations").get<long>();
  CHECK(s2 <= cfg.iterations);
  CHECK(report.at("exact_filter_calls").get<long>() == 1 + s2);
  if (s2 > 0)
    CHECK(report.at("alpha2_given_1").get<double>() ==
          doctest::Approx(static_cast<double>(report.at("accepted").get<long>()) / s2));
  CHECK(report.at("alpha1").get<double>() * cfg.iterations == doctest::Approx(static_cast<double>(s2)));
  const auto density = parse_csv(read_text_file((out / "density.csv").string()));
  CHECK(density.values.rows() == 256);
  CHECK(density.header.size() == 2 * samples.header.size());
}

TEST_CASE("pilot summaries feed the main run") {
  const auto out = scratch("pilot");
  auto cfg = small_lv(Algorithm::DapmmhLna, out);
  cfg.iterations = 60;
  cfg.burn_in = 0.0;
  const auto s = run_pilot(cfg);
  CHECK(fs::exists(out / "pilot.json"));
  const auto back = PilotSummary::from_json(json::parse(read_text_file((out / "pilot.json").string())));
  CHECK(back.mean_log_params == s.mean_log_params);
  CHECK(back.covariance == s.covariance);
  auto main = small_lv(Algorithm::DapmmhLna, out);
  main.pilot = (out / "pilot.json").string();
  const auto bundle = load_experiment(main.experiment);
  const auto r = resolve(main, bundle);
  CHECK(r.init == s.mean_log_params);
  CHECK(r.proposal.covariance == s.covariance);
  CHECK(r.lambda == bundle.defaults.lambda_dapmmh_lna);
  CHECK(r.proposal.d_eff == 3.0);
}

TEST_CASE("defaults resolve from the bundle") {
  const auto bundle = load_experiment("abakaliki");
  RunConfig c;
  c.experiment = "abakaliki";
  c.algorithm = Algorithm::DapmmhLna;
  c.iterations = 5;
  const auto r = resolve(c, bundle);
  CHECK(r.num_particles == 2000);
  CHECK(r.lambda == 1.1);
  CHECK(r.proposal.covariance == Eigen::MatrixXd(bundle.pilot_sd.array().square().matrix().asDiagonal()));
  CHECK(r.init == bundle.initial_params.array().log().matrix());
}

TEST_CASE("bundle files load like built-ins") {
  const auto out = scratch("bundle_file");
  const auto b = load_experiment("gene-expression");
  const std::string path = (out / "gene.json").string();
  write_text_file(path, bundle_to_json(b).dump());
  CHECK(bundles_equal(load_experiment(path), b));
  CHECK_THROWS(load_experiment((out / "absent.json").string()));
}

TEST_CASE("forward trajectories") {
  const auto b = load_experiment("lotka-volterra");
  const auto t = simulate_trajectories(b, b.true_params.value(), SimMethod::Ssa, 5.0, 0.5, 3, 2);
  CHECK(t.header == std::vector<std::string>{"time", "replicate", "prey", "predator"});
  // Data start at t = 1, so [1, 5] at spacing 0.5 has 9 points.
  CHECK(t.values.rows() == 3 * 9);
  CHECK(t.values(0, 0) == 1.0);
  CHECK(t.values(0, 2) == 70.0);
  const auto c = simulate_trajectories(b, b.true_params.value(), SimMethod::Cle, 5.0, 0.5, 2, 2, 0.05);
  CHECK(c.values.rows() == 2 * 9);
}

TEST_CASE("diagnostics from files") {
  const auto out = scratch("diagnose");
  auto cfg = small_lv(Algorithm::DapmmhLna, out);
  cfg.iterations = 50;
  run(cfg);
  const auto d = diagnose(parse_csv(read_text_file((out / "samples.csv").string())),
                          parse_csv(read_text_file((out / "trace.csv").string())));
  CHECK(d.at("params").size() == 3);
  CHECK(d.at("params").at("c1").contains("ess"));
  CHECK(d.at("rows").get<long>() == 45);
  CHECK(d.contains("alpha1"));
}

TEST_CASE("command-line tool") {
  const auto dir = scratch("cli");
  SUBCASE("successful run") {
    const auto s = shell("run --experiment lotka-volterra --algorithm pmmh --N 50 --iters 10 --seed 1 --out " +
                             (dir / "out").string(),
                         dir);
    CHECK(s.code == 0);
    CHECK(json::parse(s.out).at("exact_filter_calls").get<long>() == 11);
  }
  SUBCASE("configuration error") {
    const auto s = shell("run --experiment lotka-volterra --algorithm dapmmh-cle --iters 10 --seed 1", dir);
    CHECK(s.code == 2);
    const auto e = json::parse(s.err);
    CHECK(e.at("error") == "config");
    CHECK(e.at("message").get<std::string>().find("dt_max") != std::string::npos);
  }
  SUBCASE("runtime error") {
    const auto s = shell("run --experiment " + (dir / "missing.json").string() + " --algorithm pmmh --iters 10 --seed 1",
                         dir);
    CHECK(s.code == 1);
    CHECK(json::parse(s.err).at("error") == "runtime");
  }
  SUBCASE("usage error") {
    const auto s = shell("run --no-such-flag", dir);
    CHECK(s.code == 2);
    CHECK(json::parse(s.err).at("error") == "usage");
  }
  SUBCASE("export") {
    const auto s = shell("export --experiment abakaliki", dir);
    CHECK(s.code == 0);
    CHECK(bundles_equal(bundle_from_json(json::parse(s.out)), load_experiment("abakaliki")));
  }
}
