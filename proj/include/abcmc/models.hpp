#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/core.hpp"
#include "abcmc/quadrature.hpp"
#include "abcmc/rng.hpp"

namespace abcmc {

/// Observed or simulated sample y = (y_1, ..., y_n).
using Dataset = Eigen::VectorXd;

struct ParameterSupport {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool contains(double theta) const { return std::isfinite(theta) && theta > lower && theta < upper; }
};

/// Log marginal likelihood log m(y) (natural log).
struct MarginalLikelihood {
  double log_value = 0.0;
};

/// A family of M generative models with a scalar parameter each, priors,
/// a simulator and a summary map. Implementations are stateless after
/// construction and safe to share between threads.
class ModelSuite {
 public:
  virtual ~ModelSuite() = default;

  virtual std::string id() const = 0;
  virtual int n_models() const = 0;
  virtual std::vector<std::string> param_names() const { return {"theta"}; }
  virtual std::vector<std::string> stat_names() const = 0;

  virtual ParameterSupport support(ModelIndex m) const = 0;
  virtual double draw_parameter(ModelIndex m, Engine& rng) const = 0;
  /// n i.i.d. draws from f_m(.|theta). Throws InvalidArgument outside the support.
  virtual Dataset simulate(ModelIndex m, double theta, std::size_t n, Engine& rng) const = 0;
  virtual Eigen::VectorXd summarize(const Dataset& y) const = 0;

  virtual double log_prior(ModelIndex m, double theta) const = 0;
  virtual double log_likelihood(ModelIndex m, double theta, const Dataset& y) const = 0;
  /// Parameter values where the log likelihood has kinks (used as quadrature panel edges).
  virtual std::vector<double> kinks(ModelIndex, const Dataset&) const { return {}; }

  void check_model(ModelIndex m) const;
};

/// Exponential / Log-Normal / Gamma(2, theta) suite on positive samples, with
/// summaries (sum y, sum log y, sum log^2 y).
///   Model 1: y ~ Exp(theta), theta ~ Exp(1)
///   Model 2: y ~ LogNormal(theta, 1), theta ~ N(0, 1)
///   Model 3: y ~ Gamma(2, rate theta), theta ~ Exp(1)
class SuiteThree final : public ModelSuite {
 public:
  std::string id() const override { return "toy3"; }
  int n_models() const override { return 3; }
  std::vector<std::string> stat_names() const override { return {"sum_y", "sum_log_y", "sum_log2_y"}; }

  ParameterSupport support(ModelIndex m) const override;
  double draw_parameter(ModelIndex m, Engine& rng) const override;
  Dataset simulate(ModelIndex m, double theta, std::size_t n, Engine& rng) const override;
  Eigen::VectorXd summarize(const Dataset& y) const override;
  double log_prior(ModelIndex m, double theta) const override;
  double log_likelihood(ModelIndex m, double theta, const Dataset& y) const override;
};

enum class NlSummary { MeanMedianVariance, Mad, All };

NlSummary parse_nl_summary(const std::string& name);
std::string to_string(NlSummary mode);

/// Normal N(theta, 1) (model 1) against Laplace(theta, 1/sqrt 2) (model 2),
/// theta ~ N(0, 4) (variance 4) under both.
class SuiteNormalLaplace final : public ModelSuite {
 public:
  static constexpr double kPriorVariance = 4.0;
  static const double kLaplaceScale;

  explicit SuiteNormalLaplace(NlSummary mode = NlSummary::MeanMedianVariance) : mode_(mode) {}

  std::string id() const override { return "normal-laplace"; }
  int n_models() const override { return 2; }
  std::vector<std::string> stat_names() const override;
  NlSummary mode() const { return mode_; }

  ParameterSupport support(ModelIndex m) const override;
  double draw_parameter(ModelIndex m, Engine& rng) const override;
  Dataset simulate(ModelIndex m, double theta, std::size_t n, Engine& rng) const override;
  Eigen::VectorXd summarize(const Dataset& y) const override;
  double log_prior(ModelIndex m, double theta) const override;
  double log_likelihood(ModelIndex m, double theta, const Dataset& y) const override;
  std::vector<double> kinks(ModelIndex m, const Dataset& y) const override;

 private:
  NlSummary mode_;
};

/// Suite by identifier: "toy3", or "normal-laplace" with a summary mode.
std::unique_ptr<ModelSuite> make_suite(const std::string& id, NlSummary mode = NlSummary::MeanMedianVariance);

/// (sum y_i, sum log y_i, sum log^2 y_i); every y_i must be positive.
Eigen::Vector3d summaries_three(const Dataset& y);

/// mmv: (mean, median, sample variance); mad: (MAD about the median);
/// all: (mean, median, variance, MAD).
Eigen::VectorXd summaries_nl(const Dataset& y, NlSummary mode);

/// Closed-form log m_m(y) for the three-model suite, from its sufficient
/// summaries and the sample size.
MarginalLikelihood log_marginal_three(ModelIndex m, const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n);
MarginalLikelihood log_marginal_three(ModelIndex m, const Dataset& y);

/// Model 2's marginal with the squared sum-of-squared-logs term exactly as
/// originally printed. Diagnostic only: it disagrees with direct integration.
MarginalLikelihood log_marginal_two_verbatim(const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n);

/// log of the integral of f_m(y|theta) pi_m(theta) by adaptive quadrature.
MarginalLikelihood quadrature_marginal(const ModelSuite& suite, ModelIndex m, const Dataset& y,
                                       const QuadratureOptions& options = {});

/// Softmax of log w_m + log m_m over models.
Eigen::VectorXd posterior_from_log_marginals(const Eigen::Ref<const Eigen::VectorXd>& log_marginals,
                                             const Eigen::Ref<const Eigen::VectorXd>& prior_weights);

/// Exact model posterior for the three-model suite.
Eigen::VectorXd exact_posterior(const Dataset& y, const Eigen::Ref<const Eigen::VectorXd>& prior_weights);
Eigen::VectorXd exact_posterior_from_summaries(const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n,
                                               const Eigen::Ref<const Eigen::VectorXd>& prior_weights);

/// m_a(y) / m_b(y) for the three-model suite.
double bayes_factor(ModelIndex a, ModelIndex b, const Dataset& y);

}  // namespace abcmc
