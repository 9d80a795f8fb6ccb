#include "abcmc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abcmc/stats.hpp"

namespace abcmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_exp1_prior(double theta) { return theta > 0.0 ? -theta : kNegInf; }

}  // namespace

void ModelSuite::check_model(ModelIndex m) const {
  if (m.value < 1 || m.value > n_models())
    throw InvalidArgument("model index " + std::to_string(m.value) + " outside 1.." + std::to_string(n_models()) +
                          " for suite " + id());
}

// ---------------------------------------------------------------------------
// SuiteThree

ParameterSupport SuiteThree::support(ModelIndex m) const {
  check_model(m);
  if (m.value == 2) return {};
  return {0.0, std::numeric_limits<double>::infinity()};
}

double SuiteThree::draw_parameter(ModelIndex m, Engine& rng) const {
  check_model(m);
  if (m.value == 2) return std::normal_distribution<double>(0.0, 1.0)(rng);
  return std::exponential_distribution<double>(1.0)(rng);
}

Dataset SuiteThree::simulate(ModelIndex m, double theta, std::size_t n, Engine& rng) const {
  check_model(m);
  if (!support(m).contains(theta))
    throw InvalidArgument("theta=" + std::to_string(theta) + " outside the support of model " + std::to_string(m.value));
  Dataset y(static_cast<Eigen::Index>(n));
  switch (m.value) {
    case 1: {
      std::exponential_distribution<double> dist(theta);
      for (auto& v : y) v = dist(rng);
      break;
    }
    case 2: {
      std::lognormal_distribution<double> dist(theta, 1.0);
      for (auto& v : y) v = dist(rng);
      break;
    }
    default: {
      std::gamma_distribution<double> dist(2.0, 1.0 / theta);
      for (auto& v : y) v = dist(rng);
      break;
    }
  }
  return y;
}

Eigen::VectorXd SuiteThree::summarize(const Dataset& y) const { return summaries_three(y); }

double SuiteThree::log_prior(ModelIndex m, double theta) const {
  check_model(m);
  if (m.value == 2) return -0.5 * kLog2Pi - 0.5 * theta * theta;
  return log_exp1_prior(theta);
}

double SuiteThree::log_likelihood(ModelIndex m, double theta, const Dataset& y) const {
  check_model(m);
  const double n = static_cast<double>(y.size());
  switch (m.value) {
    case 1:
      if (!(theta > 0.0)) return kNegInf;
      return n * std::log(theta) - theta * y.sum();
    case 2: {
      const Eigen::ArrayXd logs = y.array().log();
      return -logs.sum() - 0.5 * n * kLog2Pi - 0.5 * (logs - theta).square().sum();
    }
    default:
      if (!(theta > 0.0)) return kNegInf;
      return 2.0 * n * std::log(theta) + y.array().log().sum() - theta * y.sum();
  }
}

// ---------------------------------------------------------------------------
// SuiteNormalLaplace

const double SuiteNormalLaplace::kLaplaceScale = 1.0 / std::numbers::sqrt2;

NlSummary parse_nl_summary(const std::string& name) {
  if (name == "mmv") return NlSummary::MeanMedianVariance;
  if (name == "mad") return NlSummary::Mad;
  if (name == "all") return NlSummary::All;
  throw InvalidArgument("unknown summary mode '" + name + "' (expected mmv, mad or all)");
}

std::string to_string(NlSummary mode) {
  switch (mode) {
    case NlSummary::MeanMedianVariance: return "mmv";
    case NlSummary::Mad: return "mad";
    default: return "all";
  }
}

std::vector<std::string> SuiteNormalLaplace::stat_names() const {
  switch (mode_) {
    case NlSummary::MeanMedianVariance: return {"mean", "median", "variance"};
    case NlSummary::Mad: return {"mad"};
    default: return {"mean", "median", "variance", "mad"};
  }
}

ParameterSupport SuiteNormalLaplace::support(ModelIndex m) const {
  check_model(m);
  return {};
}

double SuiteNormalLaplace::draw_parameter(ModelIndex m, Engine& rng) const {
  check_model(m);
  return std::normal_distribution<double>(0.0, std::sqrt(kPriorVariance))(rng);
}

Dataset SuiteNormalLaplace::simulate(ModelIndex m, double theta, std::size_t n, Engine& rng) const {
  check_model(m);
  if (!std::isfinite(theta)) throw InvalidArgument("theta must be finite");
  Dataset y(static_cast<Eigen::Index>(n));
  if (m.value == 1) {
    std::normal_distribution<double> dist(theta, 1.0);
    for (auto& v : y) v = dist(rng);
  } else {
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : y) v = theta + kLaplaceScale * (expo(rng) - expo(rng));
  }
  return y;
}

Eigen::VectorXd SuiteNormalLaplace::summarize(const Dataset& y) const { return summaries_nl(y, mode_); }

double SuiteNormalLaplace::log_prior(ModelIndex m, double theta) const {
  check_model(m);
  return -0.5 * (kLog2Pi + std::log(kPriorVariance)) - 0.5 * theta * theta / kPriorVariance;
}

double SuiteNormalLaplace::log_likelihood(ModelIndex m, double theta, const Dataset& y) const {
  check_model(m);
  const double n = static_cast<double>(y.size());
  if (m.value == 1) return -0.5 * n * kLog2Pi - 0.5 * (y.array() - theta).square().sum();
  return -n * std::log(2.0 * kLaplaceScale) - (y.array() - theta).abs().sum() / kLaplaceScale;
}

std::vector<double> SuiteNormalLaplace::kinks(ModelIndex m, const Dataset& y) const {
  if (m.value != 2) return {};
  std::vector<double> points(y.begin(), y.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

std::unique_ptr<ModelSuite> make_suite(const std::string& id, NlSummary mode) {
  if (id == "toy3") return std::make_unique<SuiteThree>();
  if (id == "normal-laplace") return std::make_unique<SuiteNormalLaplace>(mode);
  throw InvalidArgument("unknown suite '" + id + "' (expected toy3 or normal-laplace)");
}

// ---------------------------------------------------------------------------
// Summaries

Eigen::Vector3d summaries_three(const Dataset& y) {
  if (y.size() == 0) throw InvalidArgument("summaries_three: empty dataset");
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw InvalidArgument("summaries_three: entry " + std::to_string(i) + " is not a positive finite value");
    const double l = std::log(y[i]);
    s[0] += y[i];
    s[1] += l;
    s[2] += l * l;
  }
  return s;
}

Eigen::VectorXd summaries_nl(const Dataset& y, NlSummary mode) {
  if (y.size() == 0) throw InvalidArgument("summaries_nl: empty dataset");
  if (mode == NlSummary::Mad) return Eigen::VectorXd::Constant(1, mad(y));
  if (y.size() < 2) throw InvalidArgument("summaries_nl: mean/median/variance summaries need n >= 2");
  Eigen::VectorXd s(mode == NlSummary::All ? 4 : 3);
  s[0] = y.mean();
  s[1] = median(y);
  s[2] = sample_variance(y);
  if (mode == NlSummary::All) s[3] = mad(y);
  return s;
}

// ---------------------------------------------------------------------------
// Marginal likelihoods

MarginalLikelihood log_marginal_three(ModelIndex m, const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n) {
  if (summaries.size() < 3) throw InvalidArgument("log_marginal_three: need the three sufficient summaries");
  if (n == 0) throw InvalidArgument("log_marginal_three: n must be positive");
  const double nn = static_cast<double>(n);
  const double sum_y = summaries[0];
  const double sum_log = summaries[1];
  const double sum_log2 = summaries[2];
  switch (m.value) {
    case 1:
      return {std::lgamma(nn + 1.0) - (nn + 1.0) * std::log1p(sum_y)};
    case 2:
      return {-sum_log * sum_log / (2.0 * nn * (nn + 1.0)) - sum_log2 / 2.0 + sum_log * sum_log / (2.0 * nn) - sum_log -
              0.5 * nn * kLog2Pi - 0.5 * std::log(nn + 1.0)};
    case 3:
      return {sum_log + std::lgamma(2.0 * nn + 1.0) - nn * std::lgamma(2.0) - (2.0 * nn + 1.0) * std::log1p(sum_y)};
    default:
      throw InvalidArgument("log_marginal_three: model index must be 1, 2 or 3");
  }
}

MarginalLikelihood log_marginal_three(ModelIndex m, const Dataset& y) {
  return log_marginal_three(m, summaries_three(y), static_cast<std::size_t>(y.size()));
}

MarginalLikelihood log_marginal_two_verbatim(const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double sum_log = summaries[1];
  const double sum_log2 = summaries[2];
  return {-sum_log * sum_log / (2.0 * nn * (nn + 1.0)) - sum_log2 * sum_log2 / 2.0 + sum_log * sum_log / (2.0 * nn) -
          sum_log - 0.5 * nn * kLog2Pi - 0.5 * std::log(nn + 1.0)};
}

MarginalLikelihood quadrature_marginal(const ModelSuite& suite, ModelIndex m, const Dataset& y,
                                       const QuadratureOptions& options) {
  suite.check_model(m);
  const auto support = suite.support(m);
  auto log_integrand = [&](double theta) { return suite.log_likelihood(m, theta, y) + suite.log_prior(m, theta); };
  const auto result = log_integrate(log_integrand, support.lower, support.upper, suite.kinks(m, y), options);
  return {result.log_value};
}

Eigen::VectorXd posterior_from_log_marginals(const Eigen::Ref<const Eigen::VectorXd>& log_marginals,
                                             const Eigen::Ref<const Eigen::VectorXd>& prior_weights) {
  if (log_marginals.size() != prior_weights.size())
    throw InvalidArgument("posterior: weights and marginals differ in length");
  if ((prior_weights.array() < 0.0).any() || std::abs(prior_weights.sum() - 1.0) > 1e-9)
    throw InvalidArgument("posterior: prior weights must be nonnegative and sum to one");
  Eigen::VectorXd scores(log_marginals.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    scores[i] = prior_weights[i] > 0.0 ? std::log(prior_weights[i]) + log_marginals[i] : kNegInf;
  const double top = scores.maxCoeff();
  Eigen::VectorXd p = (scores.array() - top).unaryExpr([](double v) { return std::exp(v); });
  return p / p.sum();
}

Eigen::VectorXd exact_posterior_from_summaries(const Eigen::Ref<const Eigen::VectorXd>& summaries, std::size_t n,
                                               const Eigen::Ref<const Eigen::VectorXd>& prior_weights) {
  Eigen::Vector3d logs;
  for (int m = 1; m <= 3; ++m) logs[m - 1] = log_marginal_three(ModelIndex(m), summaries, n).log_value;
  return posterior_from_log_marginals(logs, prior_weights);
}

Eigen::VectorXd exact_posterior(const Dataset& y, const Eigen::Ref<const Eigen::VectorXd>& prior_weights) {
  return exact_posterior_from_summaries(summaries_three(y), static_cast<std::size_t>(y.size()), prior_weights);
}

double bayes_factor(ModelIndex a, ModelIndex b, const Dataset& y) {
  return std::exp(log_marginal_three(a, y).log_value - log_marginal_three(b, y).log_value);
}

}  // namespace abcmc
