#include <doctest.h>

#include <cmath>
#include <numbers>

#include "abcmc/models.hpp"
#include "abcmc/stats.hpp"

using namespace abcmc;

namespace {

double sample_mean(const ModelSuite& suite, int m, double theta, std::size_t n, std::uint64_t seed) {
  auto rng = child_engine(seed, 0);
  return suite.simulate(ModelIndex(m), theta, n, rng).mean();
}

Dataset random_dataset(const SuiteThree& suite, int m, std::size_t n, std::uint64_t seed) {
  auto rng = child_engine(seed, static_cast<std::uint64_t>(m));
  const double theta = suite.draw_parameter(ModelIndex(m), rng);
  return suite.simulate(ModelIndex(m), theta, n, rng);
}

}  // namespace

TEST_CASE("simulated sample means match the model expectations") {
  const SuiteThree suite;
  const double n = 1e5;
  // Exp(2): mean 1/2, sd 1/2.
  CHECK(std::abs(sample_mean(suite, 1, 2.0, 100000, 1) - 0.5) < 3 * 0.5 / std::sqrt(n));
  // Gamma(2, rate 1): mean 2, sd sqrt 2.
  CHECK(std::abs(sample_mean(suite, 3, 1.0, 100000, 2) - 2.0) < 3 * std::sqrt(2.0) / std::sqrt(n));
  // LogNormal(0, 1): mean exp(1/2), sd sqrt((e - 1) e).
  const double sd = std::sqrt((std::exp(1.0) - 1.0) * std::exp(1.0));
  CHECK(std::abs(sample_mean(suite, 2, 0.0, 100000, 3) - std::exp(0.5)) < 4 * sd / std::sqrt(n));
}

TEST_CASE("Laplace draws have unit variance") {
  const SuiteNormalLaplace suite;
  auto rng = child_engine(4, 0);
  const auto y = suite.simulate(ModelIndex(2), 0.0, 100000, rng);
  // Var of the sample variance is about (mu4 - 1) / n = 5 / n for a unit Laplace.
  CHECK(std::abs(sample_variance(y) - 1.0) < 4 * std::sqrt(5.0 / 1e5));
  CHECK(std::abs(y.mean()) < 4 / std::sqrt(1e5));
}

TEST_CASE("parameters outside the support are rejected") {
  const SuiteThree suite;
  auto rng = child_engine(1, 1);
  CHECK_THROWS_AS(suite.simulate(ModelIndex(1), 0.0, 5, rng), InvalidArgument);
  CHECK_THROWS_AS(suite.simulate(ModelIndex(3), -1.0, 5, rng), InvalidArgument);
  CHECK_NOTHROW(suite.simulate(ModelIndex(2), -1.0, 5, rng));
  CHECK_THROWS_AS(suite.simulate(ModelIndex(4), 1.0, 5, rng), InvalidArgument);
}

TEST_CASE("three-model summaries") {
  const double e = std::numbers::e;
  CHECK(summaries_three(Eigen::Vector3d(1, 1, 1)) == Eigen::Vector3d(3, 0, 0));
  const auto one = summaries_three(Eigen::VectorXd::Constant(1, e));
  CHECK(one[0] == doctest::Approx(e));
  CHECK(one[1] == doctest::Approx(1.0));
  CHECK(one[2] == doctest::Approx(1.0));
  const auto two = summaries_three(Eigen::Vector2d(e, e * e));
  CHECK(two[0] == doctest::Approx(e + e * e));
  CHECK(two[1] == doctest::Approx(3.0));
  CHECK(two[2] == doctest::Approx(5.0));
  CHECK_THROWS_AS(summaries_three(Eigen::Vector2d(1.0, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(summaries_three(Eigen::Vector2d(1.0, -2.0)), InvalidArgument);
}

TEST_CASE("normal-laplace summaries") {
  CHECK(summaries_nl(Eigen::Vector4d::Zero(), NlSummary::MeanMedianVariance) == Eigen::Vector3d::Zero());
  const auto s = summaries_nl(Eigen::Vector3d(1, 2, 3), NlSummary::MeanMedianVariance);
  CHECK(s[0] == doctest::Approx(2.0));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK(s[2] == doctest::Approx(1.0));
  const auto m = summaries_nl(Eigen::Vector3d(1, 2, 4), NlSummary::Mad);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == 1.0);
  CHECK(summaries_nl(Eigen::Vector3d(1, 2, 4), NlSummary::All).size() == 4);
  CHECK_THROWS_AS(summaries_nl(Eigen::VectorXd::Ones(1), NlSummary::MeanMedianVariance), InvalidArgument);
  CHECK(parse_nl_summary("mad") == NlSummary::Mad);
  CHECK(to_string(parse_nl_summary("mmv")) == "mmv");
  CHECK_THROWS_AS(parse_nl_summary("iqr"), InvalidArgument);
}

TEST_CASE("closed-form marginals at y = (1)") {
  const Dataset y = Eigen::VectorXd::Ones(1);
  CHECK(log_marginal_three(ModelIndex(1), y).log_value == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(log_marginal_three(ModelIndex(3), y).log_value == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  const double two = log_marginal_three(ModelIndex(2), y).log_value;
  CHECK(two == doctest::Approx(-std::log(2.0 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
  CHECK(two == doctest::Approx(-1.2655).epsilon(1e-4));
}

TEST_CASE("Log-Normal marginal matches the conjugate normal oracle") {
  // log y ~ N(theta 1, I) with theta ~ N(0, 1) gives log y ~ N(0, I + J).
  const SuiteThree suite;
  for (std::size_t n : {1u, 4u, 9u}) {
    const auto y = random_dataset(suite, 2, n, 30 + n);
    const Eigen::VectorXd x = y.array().log();
    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(nn, nn) + Eigen::MatrixXd::Ones(nn, nn);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::VectorXd z = llt.matrixL().solve(x);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double oracle = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
                          0.5 * z.squaredNorm() - x.sum();
    CHECK(log_marginal_three(ModelIndex(2), y).log_value == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("the printed Log-Normal marginal differs from the corrected one") {
  const SuiteThree suite;
  const auto y = random_dataset(suite, 2, 20, 77);
  const auto s = summaries_three(y);
  CHECK(std::abs(log_marginal_two_verbatim(s, 20).log_value - log_marginal_three(ModelIndex(2), y).log_value) > 1.0);
}

TEST_CASE("exact posterior") {
  const Eigen::Vector3d uniform = Eigen::Vector3d::Constant(1.0 / 3.0);
  SUBCASE("equal marginals give the prior") {
    const auto p = posterior_from_log_marginals(Eigen::Vector3d(-4.0, -4.0, -4.0), uniform);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("a point-mass prior gives a point-mass posterior") {
    const SuiteThree suite;
    const auto y = random_dataset(suite, 3, 20, 5);
    const auto p = exact_posterior(y, Eigen::Vector3d(1, 0, 0));
    CHECK(p == Eigen::Vector3d(1, 0, 0));
  }
  SUBCASE("shifting every log marginal by a constant changes nothing") {
    const Eigen::Vector3d logs(-10.0, -12.5, -9.0);
    const auto a = posterior_from_log_marginals(logs, uniform);
    const auto b = posterior_from_log_marginals(logs.array() + 700.0, uniform);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("probabilities sum to one") {
    const SuiteThree suite;
    for (int m = 1; m <= 3; ++m) {
      const auto p = exact_posterior(random_dataset(suite, m, 20, 100 + static_cast<std::uint64_t>(m)), uniform);
      CHECK(std::abs(p.sum() - 1.0) < 1e-12);
      CHECK((p.array() >= 0.0).all());
    }
  }
  CHECK_THROWS_AS(posterior_from_log_marginals(Eigen::Vector3d::Zero(), Eigen::Vector3d(0.5, 0.5, 0.5)),
                  InvalidArgument);
}

TEST_CASE("Bayes factors") {
  const SuiteThree suite;
  const Dataset one = Eigen::VectorXd::Ones(1);
  CHECK(bayes_factor(ModelIndex(1), ModelIndex(3), one) == doctest::Approx(1.0));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto y = random_dataset(suite, static_cast<int>(seed % 3) + 1, 20, seed);
    CHECK(bayes_factor(ModelIndex(2), ModelIndex(2), y) == 1.0);
    const double cycle = bayes_factor(ModelIndex(1), ModelIndex(2), y) * bayes_factor(ModelIndex(2), ModelIndex(3), y) *
                         bayes_factor(ModelIndex(3), ModelIndex(1), y);
    CHECK(cycle == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("summaries and marginals are permutation invariant") {
  const SuiteThree suite;
  const auto y = random_dataset(suite, 1, 20, 8);
  const Dataset r = y.reverse();
  CHECK((summaries_three(y) - summaries_three(r)).cwiseAbs().maxCoeff() < 1e-12);
  for (int m = 1; m <= 3; ++m)
    CHECK(log_marginal_three(ModelIndex(m), y).log_value ==
          doctest::Approx(log_marginal_three(ModelIndex(m), r).log_value).epsilon(1e-13));
  const Dataset z = Eigen::Vector4d(0.3, -1.0, 2.0, 0.1);
  CHECK(summaries_nl(z, NlSummary::All) == summaries_nl(z.reverse().eval(), NlSummary::All));
}

TEST_CASE("expected MAD separates the Normal and Laplace models") {
  const SuiteNormalLaplace suite;
  for (int m = 1; m <= 2; ++m) {
    double total = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      auto rng = child_engine(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r));
      total += mad(suite.simulate(ModelIndex(m), 1.5, 1000, rng));
    }
    const double expected = m == 1 ? 0.6744897501960817 : std::log(2.0) / std::sqrt(2.0);
    CHECK(std::abs(total / reps - expected) < 0.01);
  }
}

TEST_CASE("suite factory") {
  CHECK(make_suite("toy3")->n_models() == 3);
  const auto nl = make_suite("normal-laplace", NlSummary::Mad);
  CHECK(nl->n_models() == 2);
  CHECK(nl->stat_names() == std::vector<std::string>{"mad"});
  CHECK_THROWS_AS(make_suite("coalescent"), InvalidArgument);
}
