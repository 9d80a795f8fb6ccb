#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/forest.hpp"
#include "abcmc/neighbors.hpp"
#include "abcmc/reftable.hpp"

namespace abcmc {

/// Selected model with its estimated posterior probability 1 - rho(s_obs).
struct PosteriorReport {
  ModelIndex map_model;
  Eigen::VectorXd votes;
  double rho = 0.0;
  double posterior_prob = 1.0;

  /// {"map_model": m, "votes": [...], "rho": r, "posterior_prob": p}
  std::string to_json() const;
};

/// 0/1 indicators that the out-of-bag prediction of each record misses its
/// model. Records with no out-of-bag tree are listed in `skipped` and have no label.
struct OobLabels {
  std::vector<std::size_t> rows;
  Eigen::VectorXd labels;
  std::vector<std::size_t> skipped;
};

OobLabels oob_misclassification_labels(const Forest& classifier, const ReferenceTable& table);

/// Regression forest of the labels on the summaries of `table` (rows listed in labels.rows).
Forest grow_error_regressor(const ReferenceTable& table, const OobLabels& labels, ForestConfig config);

/// MAP from the classifier's votes; posterior_prob = clamp(1 - rho(s_obs), 0, 1).
PosteriorReport map_posterior(const Forest& classifier, const Forest& error_regressor,
                              const Eigen::Ref<const Eigen::VectorXd>& s_obs);

/// Kernel-weighted local error of a k-NN classifier trained on `train`,
/// estimated from its misclassifications of a disjoint evaluation table.
class LocalErrorEstimator {
 public:
  LocalErrorEstimator(const ReferenceTable& train, std::size_t k, const ReferenceTable& eval_set, unsigned workers = 1);

  /// Weighted mean of the misclassification indicators with weights K(||s_i - s_obs|| / h).
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel, double bandwidth) const;
  /// Bandwidth at the given distance quantile over the evaluation table.
  double at_quantile(const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel = Kernel::Epanechnikov,
                     double quantile = 0.05) const;

  const Eigen::VectorXd& misclassified() const { return wrong_; }
  double global_error() const { return wrong_.mean(); }

 private:
  const ReferenceTable& eval_;
  Eigen::VectorXd wrong_;
};

double local_error_nw(const ReferenceTable& train, std::size_t k, const ReferenceTable& eval_set,
                      const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel, double bandwidth);

}  // namespace abcmc
