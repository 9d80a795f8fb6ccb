#include <doctest.h>

#include <cmath>

#include "abcmc/loclogit.hpp"
#include "tables.hpp"

using namespace abcmc;
using abcmc::testing::make_table;

namespace {

// Every grid point carries one record of each model plus an extra model-1 record on
// the left half and an extra model-2 record on the right half, so reflecting x
// swaps the two models.
ReferenceTable symmetric_table() {
  std::vector<int> labels;
  std::vector<Eigen::Vector2d> points;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) {
      const Eigen::Vector2d p(i, j);
      for (int m : {1, 2}) {
        labels.push_back(m);
        points.push_back(p);
      }
      if (i != 0) {
        labels.push_back(i < 0 ? 1 : 2);
        points.push_back(p);
      }
    }
  RowMatrix s(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t r = 0; r < points.size(); ++r) s.row(static_cast<Eigen::Index>(r)) = points[r].transpose();
  return make_table(labels, s, 2);
}

}  // namespace

TEST_CASE("kernel weights") {
  RowMatrix s(12, 1);
  for (int i = 0; i < 12; ++i) s(i, 0) = i;
  const auto t = make_table({1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2}, s, 2);
  const auto w = kernel_weights_with_bandwidth(t, Eigen::VectorXd::Constant(1, 3.0), Kernel::Epanechnikov, 4.0);
  CHECK(w[3] == kernel_value(Kernel::Epanechnikov, 0.0));
  CHECK(w.maxCoeff() == w[3]);
  CHECK(w[7] == 0.0);
  CHECK(w[11] == 0.0);
  CHECK((w.array() >= 0.0).all());
  // M (d + 2) = 6 positive weights are needed.
  CHECK_THROWS_AS(kernel_weights_with_bandwidth(t, Eigen::VectorXd::Constant(1, 3.0), Kernel::Epanechnikov, 3.0),
                  InvalidArgument);
  CHECK_THROWS_AS(kernel_weights_with_bandwidth(t, Eigen::VectorXd::Zero(1), Kernel::Uniform, 0.0), InvalidArgument);
}

TEST_CASE("the 1% quantile rule keeps about 1% of the weights") {
  const auto d = abcmc::testing::toy_tables(3, 9000, 0, 100);
  for (std::size_t q = 0; q < 10; ++q) {
    const auto w = kernel_weights(d.train, d.test.stats_row(q).transpose());
    const auto positive = (w.array() > 0.0).count();
    CHECK(positive >= 85);
    CHECK(positive <= 90);
  }
}

TEST_CASE("balanced weighted data give equal probabilities") {
  const auto t = symmetric_table();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(t.size()));
  const auto fit = fit_local_multinomial(t, w);
  CHECK(fit.converged);
  const auto p = predict_local_logit(fit, Eigen::Vector2d::Zero());
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("weights on one model only drive its probability to one") {
  const auto d = abcmc::testing::toy_tables(4, 3000, 0, 10);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.train.size()));
  for (std::size_t i = 0; i < d.train.size(); ++i)
    if (d.train.model(i).value == 2) w[static_cast<Eigen::Index>(i)] = 1.0 + static_cast<double>(i % 3);
  const auto fit = fit_local_multinomial(d.train, w);
  const auto p = predict_local_logit(fit, d.test.stats_row(0).transpose());
  CHECK(p[1] >= 1.0 - 1e-5);
}

TEST_CASE("Newton steps never decrease the penalized objective") {
  const auto d = abcmc::testing::toy_tables(5, 9000, 0, 20);
  for (std::size_t q = 0; q < 20; ++q) {
    const Eigen::VectorXd s = d.test.stats_row(q).transpose();
    const auto fit = fit_local_multinomial(d.train, kernel_weights(d.train, s));
    CHECK(fit.converged);
    CHECK(fit.coefficients.rows() == 2);
    CHECK(fit.coefficients.cols() == 4);
    CHECK(fit.coefficients.allFinite());
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      CHECK(fit.objective_trace[i] >= fit.objective_trace[i - 1]);
  }
}

TEST_CASE("translating the summaries leaves predictions unchanged") {
  const auto d = abcmc::testing::toy_tables(6, 9000, 0, 20);
  const Eigen::RowVector3d shift(3.5, -20.0, 0.25);
  const RowMatrix moved = d.train.stats().rowwise() + shift;
  const auto shifted = d.train.with_stats(moved, d.train.stat_names());
  for (std::size_t q = 0; q < 20; ++q) {
    const Eigen::VectorXd s = d.test.stats_row(q).transpose();
    const Eigen::VectorXd s2 = s + shift.transpose();
    const auto a = local_logit_probabilities(d.train, s);
    const auto b = local_logit_probabilities(shifted, s2);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("prediction from given coefficients") {
  LocalFit fit;
  fit.center = Eigen::Vector2d::Zero();
  fit.coefficients = Eigen::MatrixXd::Zero(2, 3);
  const auto uniform = predict_local_logit(fit, Eigen::Vector2d(1.0, -2.0));
  for (int m = 0; m < 3; ++m) CHECK(uniform[m] == doctest::Approx(1.0 / 3.0));

  // With M = 2 the reference category is model 2; a large negative score for model 1 favours model 2.
  LocalFit two;
  two.center = Eigen::VectorXd::Zero(1);
  two.coefficients = Eigen::MatrixXd::Zero(1, 2);
  two.coefficients(0, 0) = -40.0;
  CHECK(predict_local_logit(two, Eigen::VectorXd::Zero(1))[1] > 1.0 - 1e-15);

  Engine rng = child_engine(9, 0);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int r = 0; r < 50; ++r) {
    fit.coefficients = Eigen::MatrixXd::NullaryExpr(2, 3, [&] { return normal(rng); });
    const auto p = predict_local_logit(fit, Eigen::Vector2d(normal(rng), normal(rng)));
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK((p.array() >= 0.0).all());
  }
  CHECK_THROWS_AS(predict_local_logit(fit, Eigen::Vector3d::Zero()), InvalidArgument);
}

TEST_CASE("separated data without a ridge are reported") {
  RowMatrix s(40, 1);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    s(i, 0) = i;
    labels.push_back(i < 20 ? 1 : 2);
  }
  const auto t = make_table(labels, s, 2);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(40);
  LocalFitOptions unpenalized;
  unpenalized.ridge = 0.0;
  CHECK_THROWS_AS(fit_local_multinomial(t, w, unpenalized), NonConvergence);
  CHECK(fit_local_multinomial(t, w).converged);
}

TEST_CASE("local logit beats calibrated knn against the exact posterior") {
  const auto d = abcmc::testing::toy_tables(7);
  const std::size_t k = calibrate_k(d.train, d.calib, default_k_grid(d.train.size())).k_star;
  const Eigen::Vector3d prior = Eigen::Vector3d::Constant(1.0 / 3.0);
  double logit_mae = 0.0, knn_mae = 0.0;
  for (std::size_t q = 0; q < 200; ++q) {
    const Eigen::VectorXd s = d.test.stats_row(q).transpose();
    const auto exact = exact_posterior_from_summaries(d.raw_test.stats_row(q).transpose(), 20, prior);
    logit_mae += (local_logit_probabilities(d.train, s) - exact).cwiseAbs().sum();
    knn_mae += (knn_classify(d.train, s, k).freqs - exact).cwiseAbs().sum();
  }
  CHECK(logit_mae <= knn_mae);
}
