#include <doctest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "abcmc/posterior.hpp"
#include "abcmc/stats.hpp"
#include "tables.hpp"

using namespace abcmc;
using abcmc::testing::make_table;

namespace {

const abcmc::testing::ToyTables& toy() {
  static const auto t = abcmc::testing::toy_tables(31, 6000, 1000, 1000);
  return t;
}

ForestConfig config(std::size_t trees, std::uint64_t seed) {
  ForestConfig c;
  c.n_trees = trees;
  c.seed = seed;
  return c;
}

ReferenceTable separable_table() {
  RowMatrix x(300, 2);
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < 300; ++i) {
    const int m = static_cast<int>(i % 3);
    x(i, 0) = 10.0 * m + static_cast<double>(i % 7) * 0.1;
    x(i, 1) = static_cast<double>(i % 11);
    labels.push_back(m + 1);
  }
  return make_table(labels, x, 3);
}

}  // namespace

TEST_CASE("out-of-bag misclassification labels") {
  const auto& d = toy();
  const auto f = grow_forest(d.train, ForestKind::Classification, config(60, 1));
  const auto labels = oob_misclassification_labels(f, d.train);
  const auto oob = oob_predictions(f, d.train);
  CHECK(labels.rows.size() + labels.skipped.size() == d.train.size());
  CHECK(static_cast<std::size_t>(labels.labels.size()) == labels.rows.size());
  CHECK(std::abs(labels.labels.mean() - oob.error_rate) <= 1e-12);
  for (std::size_t j = 0; j < labels.rows.size(); ++j) {
    const auto r = labels.rows[j];
    CHECK(labels.labels[static_cast<Eigen::Index>(j)] == (*oob.predictions[r] == d.train.model(r) ? 0.0 : 1.0));
  }
}

TEST_CASE("constant labels give a constant error regressor") {
  const auto& d = toy();
  for (double value : {0.0, 1.0}) {
    OobLabels labels;
    for (std::size_t i = 0; i < 500; ++i) labels.rows.push_back(i);
    labels.labels = Eigen::VectorXd::Constant(500, value);
    const auto rho = grow_error_regressor(d.train, labels, config(10, 2));
    for (std::size_t q = 0; q < 20; ++q) CHECK(rho.predict_value(d.test.stats_row(q).transpose()) == value);
  }
  OobLabels mismatched;
  mismatched.rows = {0, 1};
  mismatched.labels = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(grow_error_regressor(d.train, mismatched, config(1, 2)), InvalidArgument);
}

TEST_CASE("posterior probability is one minus rho") {
  const auto& d = toy();
  const auto clf = grow_forest(d.train, ForestKind::Classification, config(10, 3));
  OobLabels labels;
  for (std::size_t i = 0; i < 200; ++i) labels.rows.push_back(i);
  for (double value : {0.0, 0.3}) {
    labels.labels = Eigen::VectorXd::Constant(200, value);
    const auto rho = grow_error_regressor(d.train, labels, config(5, 4));
    const auto report = map_posterior(clf, rho, d.test.stats_row(0).transpose());
    CHECK(report.rho == doctest::Approx(value));
    CHECK(report.posterior_prob == doctest::Approx(1.0 - value));
    CHECK(report.votes.sum() == 10.0);
    CHECK(report.map_model == clf.predict_class(d.test.stats_row(0).transpose()));
  }
  const auto narrow = grow_forest(d.train.select_columns({0, 1}), ForestKind::Classification, config(2, 5));
  const auto rho = grow_error_regressor(d.train, labels, config(2, 5));
  CHECK_THROWS_AS(map_posterior(narrow, rho, d.test.stats_row(0).transpose()), InvalidArgument);
}

TEST_CASE("separable tables give rho identically zero") {
  const auto t = separable_table();
  const auto clf = grow_forest(t, ForestKind::Classification, config(50, 6));
  CHECK(oob_error(clf, t) == 0.0);
  const auto rho = grow_error_regressor(t, oob_misclassification_labels(clf, t), config(50, 7));
  for (double x0 : {0.0, 4.0, 10.3, 25.0})
    for (double x1 : {0.0, 5.5}) {
      const auto r = map_posterior(clf, rho, Eigen::Vector2d(x0, x1));
      CHECK(r.rho == 0.0);
      CHECK(r.posterior_prob == 1.0);
    }
}

TEST_CASE("rho is calibrated in the large and ranks with the exact posterior") {
  const auto& d = toy();
  const auto clf = grow_forest(d.train, ForestKind::Classification, config(200, 8));
  const auto rho = grow_error_regressor(d.train, oob_misclassification_labels(clf, d.train), config(200, 9));
  const Eigen::Vector3d prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  Eigen::VectorXd r(static_cast<Eigen::Index>(d.test.size())), exact_miss(r.size());
  double wrong = 0.0;
  for (std::size_t q = 0; q < d.test.size(); ++q) {
    const auto report = map_posterior(clf, rho, d.test.stats_row(q).transpose());
    CHECK((report.posterior_prob >= 0.0 && report.posterior_prob <= 1.0));
    const auto exact = exact_posterior_from_summaries(d.raw_test.stats_row(q).transpose(), 20, prior);
    r[static_cast<Eigen::Index>(q)] = report.rho;
    exact_miss[static_cast<Eigen::Index>(q)] = 1.0 - exact[static_cast<Eigen::Index>(report.map_model.slot())];
    wrong += report.map_model != d.test.model(q);
  }
  CHECK(std::abs(r.mean() - wrong / static_cast<double>(d.test.size())) <= 0.03);
  CHECK(spearman(r, exact_miss) > 0.0);
}

TEST_CASE("Nadaraya-Watson local error of k-NN") {
  const auto& d = toy();
  const double inf = std::numeric_limits<double>::infinity();
  SUBCASE("a perfect classifier has zero local error") {
    const auto t = separable_table();
    const auto eval = t.subset({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(local_error_nw(t, 1, eval, Eigen::Vector2d(10.0, 3.0), Kernel::Gaussian, 5.0) == 0.0);
  }
  SUBCASE("uniform kernel with infinite bandwidth gives the global error") {
    const LocalErrorEstimator est(d.train, 20, d.calib);
    const double global = prior_error_rate(knn_predict_all(d.train, d.calib, 20), d.calib);
    CHECK(est(d.test.stats_row(0).transpose(), Kernel::Uniform, inf) == doctest::Approx(global).epsilon(1e-12));
    CHECK(est.global_error() == doctest::Approx(global).epsilon(1e-12));
  }
  SUBCASE("invalid inputs") {
    const LocalErrorEstimator est(d.train, 20, d.calib);
    const Eigen::VectorXd far = Eigen::VectorXd::Constant(3, 1e6);
    CHECK_THROWS_AS(est(far, Kernel::Epanechnikov, 1.0), InvalidArgument);
    CHECK_THROWS_AS(est(far, Kernel::Epanechnikov, 0.0), InvalidArgument);
    CHECK_THROWS_AS(LocalErrorEstimator(d.train, 20, d.calib.subset({})), InvalidArgument);
  }
}

TEST_CASE("local error tracks the exact posterior better than the global error rate") {
  const auto d = abcmc::testing::toy_tables(32);
  const std::size_t k = calibrate_k(d.train, d.calib, default_k_grid(d.train.size())).k_star;
  const LocalErrorEstimator est(d.train, k, d.calib);
  const Eigen::Vector3d prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  double total = 0.0, baseline = 0.0;
  for (std::size_t q = 0; q < 100; ++q) {
    const Eigen::VectorXd s = d.test.stats_row(q).transpose();
    const auto map = knn_classify(d.train, s, k).map;
    const auto exact = exact_posterior_from_summaries(d.raw_test.stats_row(q).transpose(), 20, prior);
    const double local = est.at_quantile(s);
    CHECK((local >= 0.0 && local <= 1.0));
    total += std::abs((1.0 - local) - exact[static_cast<Eigen::Index>(map.slot())]);
    baseline += std::abs((1.0 - est.global_error()) - exact[static_cast<Eigen::Index>(map.slot())]);
  }
  CHECK(total < baseline);
}

TEST_CASE("posterior report JSON") {
  PosteriorReport r;
  r.map_model = ModelIndex(2);
  r.votes = Eigen::Vector3d(10, 473, 17);
  r.rho = 0.25;
  r.posterior_prob = 0.75;
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("map_model") == 2);
  CHECK(j.at("votes") == nlohmann::json::array({10.0, 473.0, 17.0}));
  CHECK(j.at("rho") == 0.25);
  CHECK(j.at("posterior_prob") == 0.75);
  CHECK(j.size() == 4);
}
