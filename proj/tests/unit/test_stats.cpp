#include <doctest.h>

#include <Eigen/Dense>

#include "abcmc/stats.hpp"

using namespace abcmc;

TEST_CASE("median of odd and even samples") {
  CHECK(median(Eigen::Vector3d(3, 1, 2)) == 2.0);
  CHECK(median(Eigen::Vector4d(4, 1, 3, 2)) == 2.5);
  CHECK_THROWS_AS(median(Eigen::VectorXd()), InvalidArgument);
}

TEST_CASE("MAD is unscaled and taken about the median") {
  CHECK(mad(Eigen::Vector3d(1, 2, 4)) == 1.0);
  CHECK(mad(Eigen::Vector4d(5, 5, 5, 5)) == 0.0);
}

TEST_CASE("sample variance uses n - 1") {
  CHECK(sample_variance(Eigen::Vector3d(1, 2, 3)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sample_variance(Eigen::VectorXd::Ones(1)), InvalidArgument);
}

TEST_CASE("order quantile picks the ceil(q n)-th smallest value") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(order_quantile(v, 0.0) == 1.0);
  CHECK(order_quantile(v, 0.2) == 1.0);
  CHECK(order_quantile(v, 0.21) == 2.0);
  CHECK(order_quantile(v, 1.0) == 5.0);
}

TEST_CASE("spearman uses mid-ranks") {
  const Eigen::Vector4d a(1, 2, 3, 4);
  const Eigen::Vector4d b(10, 20, 20, 40);
  CHECK(midranks(b) == Eigen::Vector4d(1, 2.5, 2.5, 4));
  CHECK(spearman(a, a.array().exp().matrix()) == doctest::Approx(1.0));
  CHECK(spearman(a, -a) == doctest::Approx(-1.0));
  CHECK(pearson(a, 2 * a + Eigen::Vector4d::Ones()) == doctest::Approx(1.0));
}
