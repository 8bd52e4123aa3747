#include "skinf/models.hpp"
#include "skinf/smc.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace skinf;
using testsupport::vec;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ObservationSeries series(std::vector<double> times, std::vector<double> ys) {
  ObservationSeries s;
  s.times = std::move(times);
  for (double y : ys) s.values.push_back(vec({y}));
  return s;
}

// Immigration-death setup shared by the unbiasedness checks.
struct ImmigrationDeathCase {
  ReactionNetwork net = testsupport::immigration_death();
  ObservationModel obs = ObservationModel::gaussian(Matrix::Identity(1, 1), Matrix::Identity(1, 1) * 4.0);
  ObservationSeries data = series({0.0, 1.0, 2.0}, {11.0, 13.5, 8.0});
  ParamVector c = ParamVector::from_values(vec({5.0, 0.5}));
  Vector x1 = vec({10});
  double exact() const {
    return testsupport::cme_gaussian_log_likelihood(5.0, 0.5, 60, 10, 2.0, data.times, {11.0, 13.5, 8.0});
  }
};

std::vector<double> ratios(const ForwardSimulator& sim, const ImmigrationDeathCase& cs, int runs, int n,
                           std::uint64_t seed) {
  const double ref = cs.exact();
  FilterOptions fo;
  fo.num_particles = n;
  std::vector<double> out;
  for (int r = 0; r < runs; ++r) {
    const double l = bootstrap_filter(sim, cs.obs, cs.data, cs.c, cs.x1, derive_key(seed, {std::uint64_t(r)}), fo);
    out.push_back(std::exp(l - ref));
  }
  return out;
}

}  // namespace

TEST_CASE("observation log-densities") {
  const auto gene = build_gene_expression();
  const ParamVector c = ParamVector::from_values(gene.true_params.value());
  CHECK(obs_log_density(gene.obs, vec({150}), vec({3, 150}), c) ==
        doctest::Approx(-std::log(10.0 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));
  CHECK(obs_log_density(gene.obs, vec({150}), vec({3, 150}), c) == doctest::Approx(-3.2215).epsilon(1e-4));

  const auto pois = ObservationModel::poisson(2, {0});
  const ParamVector any = ParamVector::from_values(vec({1, 1, 1}));
  CHECK(obs_log_density(pois, vec({0}), vec({0, 5}), any) == 0.0);
  CHECK(obs_log_density(pois, vec({2}), vec({0, 5}), any) == kNegInf);
  CHECK(obs_log_density(pois, vec({3}), vec({2, 5}), any) ==
        doctest::Approx(3 * std::log(2.0) - 2.0 - std::log(6.0)));

  const auto exact = ObservationModel::exact(Matrix::Ones(2, 1));
  CHECK(obs_log_density(exact, vec({119}), vec({100, 19}), any) == 0.0);
  CHECK(obs_log_density(exact, vec({120}), vec({100, 19}), any) == kNegInf);
}

TEST_CASE("multinomial resampling") {
  SUBCASE("all weight on one particle") {
    ParticleSet ps;
    ps.states = Matrix::Zero(1, 6);
    for (int i = 0; i < 6; ++i) ps.states(0, i) = i;
    ps.log_weights_unnorm = Vector::Constant(6, kNegInf);
    ps.log_weights_unnorm[4] = -3.0;
    CHECK(ps.normalize() == doctest::Approx(-3.0 - std::log(6.0)));
    Rng rng(3);
    const auto out = resample_multinomial(ps, rng);
    CHECK((out.states.array() == 4.0).all());
    CHECK(out.norm_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uniform weights give unit expected copy counts") {
    const int n = 1000, reps = 10000;
    const Vector w = Vector::Constant(n, 1.0 / n);
    std::vector<double> c0, c1, c999;
    Rng rng(5);
    for (int r = 0; r < reps; ++r) {
      std::vector<int> count(n, 0);
      for (int a : multinomial_ancestors(w, n, rng)) ++count[static_cast<std::size_t>(a)];
      c0.push_back(count[0]);
      c1.push_back(count[1]);
      c999.push_back(count[999]);
    }
    for (const auto* c : {&c0, &c1, &c999}) {
      const double se = testsupport::sample_sd(*c) / std::sqrt(double(reps));
      CHECK(std::abs(testsupport::sample_mean(*c) - 1.0) < 3.0 * se);
    }
  }
  SUBCASE("zero-probability particles are never chosen") {
    Vector w = Vector::Zero(10);
    w[0] = w[1] = 0.5;
    Rng rng(9);
    for (int a : multinomial_ancestors(w, 5000, rng)) CHECK((a == 0 || a == 1));
  }
  SUBCASE("no positive weight") {
    ParticleSet ps;
    ps.states = Matrix::Zero(1, 3);
    ps.log_weights_unnorm = Vector::Constant(3, kNegInf);
    CHECK(ps.normalize() == kNegInf);
    ps.norm_weights = Vector::Zero(3);
    Rng rng(1);
    CHECK_THROWS_AS(resample_multinomial(ps, rng), std::domain_error);
  }
}

TEST_CASE("normalised weights sum to one") {
  Rng rng(10);
  std::normal_distribution<double> normal(0.0, 30.0);
  for (int k = 0; k < 100; ++k) {
    ParticleSet ps;
    ps.states = Matrix::Zero(1, 50);
    ps.log_weights_unnorm = Vector(50);
    for (int i = 0; i < 50; ++i) ps.log_weights_unnorm[i] = normal(rng) - 700.0;
    const double lme = ps.normalize();
    CHECK(std::isfinite(lme));
    CHECK(std::abs(ps.norm_weights.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("log-mean-exp") {
  CHECK(log_mean_exp(vec({0, 0, 0})) == doctest::Approx(0.0));
  CHECK(log_mean_exp(vec({std::log(1.0), std::log(3.0)})) == doctest::Approx(std::log(2.0)));
  CHECK(log_mean_exp(vec({-1000, -1000})) == doctest::Approx(-1000.0));
  CHECK(log_mean_exp(vec({kNegInf, kNegInf})) == kNegInf);
  CHECK(log_mean_exp(vec({kNegInf, 0.0})) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("zero-hazard network observed exactly at its fixed state") {
  const auto net = lotka_volterra_network();
  const auto obs = ObservationModel::exact(Matrix::Ones(2, 1));
  const auto data = series({0, 1, 2, 3, 4}, {150, 150, 150, 150, 150});
  const auto sim = ssa_forward(net);
  const double l = bootstrap_filter(sim, obs, data, ParamVector::from_values(vec({0, 0, 0})), vec({70, 80}), 1);
  CHECK(l == 0.0);
}

TEST_CASE("SSA-driven filter is unbiased for the likelihood") {
  const ImmigrationDeathCase cs;
  const auto r = ratios(ssa_forward(cs.net), cs, 500, 100, 42);
  const double se = testsupport::sample_sd(r) / std::sqrt(double(r.size()));
  CHECK(std::abs(testsupport::sample_mean(r) - 1.0) < 3.0 * se);
}

TEST_CASE("CLE-driven filter stays close to the jump-process likelihood") {
  const ImmigrationDeathCase cs;
  const auto r = ratios(cle_forward(cs.net, 0.05), cs, 200, 100, 43);
  for (double v : r) CHECK(std::isfinite(v));
  CHECK(testsupport::sample_mean(r) == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("a single particle reduces to one path's observation densities") {
  const ImmigrationDeathCase cs;
  FilterOptions fo;
  fo.num_particles = 1;
  const std::uint64_t key = 77;
  const double l = bootstrap_filter(ssa_forward(cs.net), cs.obs, cs.data, cs.c, cs.x1, key, fo);
  double ref = obs_log_density(cs.obs, cs.data.values[0], cs.x1, cs.c);
  Vector x = cs.x1;
  for (std::size_t k = 1; k < cs.data.size(); ++k) {
    Rng rng(derive_key(key, {k, 0}));
    ssa_advance(cs.net, x, cs.c, cs.data.times[k - 1], cs.data.times[k], rng);
    ref += obs_log_density(cs.obs, cs.data.values[k], x, cs.c);
  }
  CHECK(l == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("estimator variance falls as particles are added") {
  const auto b = build_lotka_volterra();
  const ParamVector c = ParamVector::from_values(b.true_params.value());
  const auto sim = ssa_forward(b.network);
  std::vector<double> variances;
  for (int n : {50, 100, 200, 400}) {
    FilterOptions fo;
    fo.num_particles = n;
    std::vector<double> ls;
    for (int r = 0; r < 40; ++r)
      ls.push_back(bootstrap_filter(sim, b.obs, b.data, c, b.x1, derive_key(8, {std::uint64_t(n), std::uint64_t(r)}), fo));
    const double sd = testsupport::sample_sd(ls);
    variances.push_back(sd * sd);
  }
  MESSAGE("variance of log p-hat at N = 50, 100, 200, 400: " << variances[0] << ", " << variances[1] << ", "
                                                             << variances[2] << ", " << variances[3]);
  // Sample variances from 40 runs carry about 22% relative error.
  for (std::size_t i = 1; i < variances.size(); ++i) CHECK(variances[i] < 1.5 * variances[i - 1]);
  CHECK(variances.back() < variances.front());
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto b = build_lotka_volterra();
  const ParamVector c = ParamVector::from_values(b.true_params.value());
  const auto sim = ssa_forward(b.network);
  FilterOptions one, many;
  one.num_particles = many.num_particles = 100;
  many.workers = 4;
  for (std::uint64_t key : {1u, 2u, 3u}) {
    CHECK(bootstrap_filter(sim, b.obs, b.data, c, b.x1, key, one) ==
          bootstrap_filter(sim, b.obs, b.data, c, b.x1, key, many));
  }
  const auto csim = cle_forward(b.network, 0.1);
  CHECK(bootstrap_filter(csim, b.obs, b.data, c, b.x1, 5, one) ==
        bootstrap_filter(csim, b.obs, b.data, c, b.x1, 5, many));
}

TEST_CASE("filter failures return zero likelihood") {
  const ImmigrationDeathCase cs;
  SUBCASE("first observation impossible") {
    const auto obs = ObservationModel::exact(Matrix::Identity(1, 1));
    CHECK(bootstrap_filter(ssa_forward(cs.net), obs, series({0, 1}, {3, 3}), cs.c, cs.x1, 1) == kNegInf);
  }
  SUBCASE("later observation impossible under every particle") {
    const auto obs = ObservationModel::exact(Matrix::Identity(1, 1));
    const auto death = testsupport::pure_death();
    CHECK(bootstrap_filter(ssa_forward(death), obs, series({0, 1}, {10, 11}), ParamVector::from_values(vec({0.5})),
                           cs.x1, 1) == kNegInf);
  }
  SUBCASE("simulator error") {
    const ForwardSimulator boom = [](Vector&, double, double, const ParamVector&, Rng&) {
      throw std::runtime_error("exploded");
    };
    CHECK(bootstrap_filter(boom, cs.obs, cs.data, cs.c, cs.x1, 1) == kNegInf);
  }
  SUBCASE("event cap") {
    SsaOptions opts;
    opts.max_events = 3;
    CHECK(bootstrap_filter(ssa_forward(cs.net, opts), cs.obs, cs.data, cs.c, cs.x1, 1) == kNegInf);
  }
  SUBCASE("bad arguments") {
    FilterOptions fo;
    fo.num_particles = 0;
    CHECK_THROWS_AS(bootstrap_filter(ssa_forward(cs.net), cs.obs, cs.data, cs.c, cs.x1, 1, fo),
                    std::invalid_argument);
    CHECK_THROWS_AS(cle_forward(cs.net, 0.0), std::invalid_argument);
  }
}
