#include "abcmc/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "abcmc/stats.hpp"

namespace abcmc {

std::string PosteriorReport::to_json() const {
  nlohmann::json j;
  j["map_model"] = map_model.value;
  j["votes"] = std::vector<double>(votes.begin(), votes.end());
  j["rho"] = rho;
  j["posterior_prob"] = posterior_prob;
  return j.dump();
}

OobLabels oob_misclassification_labels(const Forest& classifier, const ReferenceTable& table) {
  const auto oob = oob_predictions(classifier, table);
  OobLabels out;
  out.skipped = oob.skipped;
  std::vector<double> labels;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!oob.predictions[i]) continue;
    out.rows.push_back(i);
    labels.push_back(*oob.predictions[i] != table.model(i) ? 1.0 : 0.0);
  }
  out.labels = Eigen::Map<Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  return out;
}

Forest grow_error_regressor(const ReferenceTable& table, const OobLabels& labels, ForestConfig config) {
  if (labels.rows.size() != static_cast<std::size_t>(labels.labels.size()))
    throw InvalidArgument("grow_error_regressor: labels and rows disagree");
  return grow_regression_forest(table.subset(labels.rows), labels.labels, config);
}

PosteriorReport map_posterior(const Forest& classifier, const Forest& error_regressor,
                              const Eigen::Ref<const Eigen::VectorXd>& s_obs) {
  if (classifier.dim != error_regressor.dim)
    throw InvalidArgument("map_posterior: the two forests use different summary layouts");
  PosteriorReport report;
  report.votes = classifier.votes(s_obs);
  report.map_model = argmax_model(report.votes);
  report.rho = std::clamp(error_regressor.predict_value(s_obs), 0.0, 1.0);
  report.posterior_prob = std::clamp(1.0 - report.rho, 0.0, 1.0);
  return report;
}

LocalErrorEstimator::LocalErrorEstimator(const ReferenceTable& train, std::size_t k, const ReferenceTable& eval_set,
                                         unsigned workers)
    : eval_(eval_set) {
  if (eval_set.size() == 0) throw InvalidArgument("local error: empty evaluation table");
  const auto predicted = knn_predict_all(train, eval_set, k, workers);
  wrong_.resize(static_cast<Eigen::Index>(eval_set.size()));
  for (std::size_t i = 0; i < eval_set.size(); ++i)
    wrong_[static_cast<Eigen::Index>(i)] = predicted[i] != eval_set.model(i) ? 1.0 : 0.0;
}

double LocalErrorEstimator::operator()(const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel,
                                       double bandwidth) const {
  if (!(bandwidth > 0.0)) throw InvalidArgument("local error: bandwidth must be positive");
  const Eigen::VectorXd d = distances(eval_, s_obs);
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double w = kernel_value(kernel, d[i] / bandwidth);
    num += w * wrong_[i];
    den += w;
  }
  if (!(den > 0.0)) throw InvalidArgument("local error: all kernel weights are zero; use a larger bandwidth");
  return num / den;
}

double LocalErrorEstimator::at_quantile(const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel,
                                        double quantile) const {
  const Eigen::VectorXd d = distances(eval_, s_obs);
  double h = order_quantile(std::vector<double>(d.begin(), d.end()), quantile);
  if (!(h > 0.0)) h = d.maxCoeff();
  if (!(h > 0.0)) h = 1.0;
  // Compact kernels give zero weight at exactly u = 1, so widen by one ulp.
  return (*this)(s_obs, kernel, std::nextafter(h, std::numeric_limits<double>::infinity()));
}

double local_error_nw(const ReferenceTable& train, std::size_t k, const ReferenceTable& eval_set,
                      const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel, double bandwidth) {
  return LocalErrorEstimator(train, k, eval_set)(s_obs, kernel, bandwidth);
}

}  // namespace abcmc
