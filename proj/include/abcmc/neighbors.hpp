#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/reftable.hpp"

namespace abcmc {

enum class Kernel { Uniform, Epanechnikov, Gaussian };

Kernel parse_kernel(const std::string& name);

/// K(u) for u = distance / bandwidth >= 0. Uniform and Epanechnikov vanish
/// for u > 1; the uniform kernel includes the boundary u = 1.
double kernel_value(Kernel kernel, double u);

/// Euclidean distances from s to every record of `train`.
Eigen::VectorXd distances(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s);

/// Indices of the k nearest records, ordered by (distance, index).
std::vector<std::size_t> nearest(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s,
                                 std::size_t k);

struct KnnResult {
  ModelIndex map;
  Eigen::VectorXd freqs;
  std::vector<std::size_t> neighbor_ids;
};

/// Vote frequencies among the k nearest records; vote ties go to the smaller model index.
/// `s` must already be on the scale of `train`.
KnnResult knn_classify(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, std::size_t k);

/// Index of the largest entry, first on ties.
ModelIndex argmax_model(const Eigen::Ref<const Eigen::VectorXd>& probs);

/// Kernel-weighted model frequencies. Throws when every weight is zero.
Eigen::VectorXd nadaraya_watson(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, Kernel kernel,
                                double bandwidth);

/// ceil(q N)-th smallest distance from s to the records of `train`.
double distance_quantile(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, double q);

struct CalibrationCurve {
  std::vector<std::size_t> grid;
  std::vector<double> errors;
  std::size_t k_star = 0;
};

/// {1,2,5,10,20,50,100,140,200,260,500,1000} restricted to [1, n_train].
std::vector<std::size_t> default_k_grid(std::size_t n_train);

/// Misclassification rate of knn_classify over `calib` for each k in `grid`;
/// k_star is the first minimizer.
CalibrationCurve calibrate_k(const ReferenceTable& train, const ReferenceTable& calib, std::vector<std::size_t> grid,
                             unsigned workers = 1);

void write_calibration_csv(const CalibrationCurve& curve, std::ostream& out);

using Classifier = std::function<ModelIndex(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Fraction of `test` records whose predicted model differs from the true one.
double prior_error_rate(const Classifier& classifier, const ReferenceTable& test, unsigned workers = 1);
double prior_error_rate(const std::vector<ModelIndex>& predictions, const ReferenceTable& test);

/// k-NN predictions for every record of `queries`.
std::vector<ModelIndex> knn_predict_all(const ReferenceTable& train, const ReferenceTable& queries, std::size_t k,
                                        unsigned workers = 1);

}  // namespace abcmc
