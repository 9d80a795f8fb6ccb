#pragma once

#include <Eigen/Dense>

#include "abcmc/neighbors.hpp"
#include "abcmc/reftable.hpp"

namespace abcmc {

/// Multinomial logit fitted on kernel-weighted records around a query point.
/// Row c of `coefficients` holds (intercept, slopes) for model c+1 against
/// the reference model M, with covariates centered at `center`.
struct LocalFit {
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd center;
  Eigen::VectorXd weights_used;
  bool converged = false;
  int iterations = 0;
  /// Penalized weighted log-likelihood after each accepted step.
  std::vector<double> objective_trace;
};

struct LocalFitOptions {
  /// Penalty on slopes (not intercepts).
  double ridge = 1e-6;
  int max_iterations = 100;
  double gradient_tol = 1e-8;
};

/// w_i = K(||s_i - s_obs|| / h) with h the `quantile` of the distances to s_obs.
/// Throws when fewer than M(d+2) weights are positive.
Eigen::VectorXd kernel_weights(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s_obs,
                               Kernel kernel = Kernel::Epanechnikov, double quantile = 0.01);

/// Same with an explicit bandwidth.
Eigen::VectorXd kernel_weights_with_bandwidth(const ReferenceTable& train,
                                              const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel,
                                              double bandwidth);

/// Maximizes the ridge-penalized weighted multinomial log-likelihood by damped
/// Newton steps. Converged once the gradient norm drops below
/// options.gradient_tol or the Newton decrement falls to the rounding level
/// of the objective. Throws NonConvergence when neither happens within
/// options.max_iterations, or when the ridge is zero and the data are separated.
LocalFit fit_local_multinomial(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& weights,
                               const LocalFitOptions& options = {});

/// Softmax of the M linear scores at s_obs.
Eigen::VectorXd predict_local_logit(const LocalFit& fit, const Eigen::Ref<const Eigen::VectorXd>& s_obs);

/// kernel_weights + fit + predict at s_obs.
Eigen::VectorXd local_logit_probabilities(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s_obs,
                                          Kernel kernel = Kernel::Epanechnikov, double quantile = 0.01,
                                          const LocalFitOptions& options = {});

}  // namespace abcmc
