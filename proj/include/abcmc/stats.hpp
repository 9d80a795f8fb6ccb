#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/core.hpp"

namespace abcmc {

namespace detail {
template <typename Derived>
std::vector<double> to_vector(const Eigen::DenseBase<Derived>& x) {
  std::vector<double> v(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i)] = x.derived().coeff(i);
  return v;
}

double median_inplace(std::vector<double>& v);
}  // namespace detail

/// Median; the mean of the two central order statistics for even sizes.
template <typename Derived>
double median(const Eigen::DenseBase<Derived>& x) {
  if (x.size() == 0) throw InvalidArgument("median of an empty sample");
  auto v = detail::to_vector(x);
  return detail::median_inplace(v);
}

/// Median absolute deviation about the median, unscaled.
template <typename Derived>
double mad(const Eigen::DenseBase<Derived>& x) {
  if (x.size() == 0) throw InvalidArgument("MAD of an empty sample");
  auto v = detail::to_vector(x);
  const double med = detail::median_inplace(v);
  for (double& e : v) e = std::abs(e - med);
  return detail::median_inplace(v);
}

/// Sample variance with the n-1 divisor.
template <typename Derived>
double sample_variance(const Eigen::DenseBase<Derived>& x) {
  if (x.size() < 2) throw InvalidArgument("sample variance needs at least two values");
  const double mean = x.derived().mean();
  return (x.derived().array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

/// Order-statistic quantile: the ceil(q*n)-th smallest value (q=0 gives the minimum).
double order_quantile(std::vector<double> values, double q);

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Pearson correlation of mid-ranks.
double spearman(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

Eigen::VectorXd midranks(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace abcmc
