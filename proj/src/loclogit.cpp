#include "abcmc/loclogit.hpp"

#include <cmath>
#include <vector>

#include "abcmc/stats.hpp"

namespace abcmc {

Eigen::VectorXd kernel_weights_with_bandwidth(const ReferenceTable& train,
                                              const Eigen::Ref<const Eigen::VectorXd>& s_obs, Kernel kernel,
                                              double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("kernel_weights: bandwidth must be positive");
  const Eigen::VectorXd d = distances(train, s_obs);
  Eigen::VectorXd w = d.unaryExpr([&](double x) { return kernel_value(kernel, x / bandwidth); });
  const auto positive = static_cast<std::size_t>((w.array() > 0.0).count());
  const std::size_t needed = static_cast<std::size_t>(train.n_models()) * (train.dim() + 2);
  if (positive < needed)
    throw InvalidArgument("kernel_weights: only " + std::to_string(positive) + " positive weights, need at least " +
                          std::to_string(needed) + " for an identifiable fit; use a larger bandwidth");
  return w;
}

Eigen::VectorXd kernel_weights(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s_obs,
                               Kernel kernel, double quantile) {
  const Eigen::VectorXd d = distances(train, s_obs);
  double h = order_quantile(std::vector<double>(d.begin(), d.end()), quantile);
  if (!(h > 0.0)) h = d.maxCoeff();
  return kernel_weights_with_bandwidth(train, s_obs, kernel, h);
}

namespace {

// Weighted local design: rows with positive weight only.
struct Design {
  Eigen::MatrixXd x;        // n x (d+1), first column ones
  Eigen::VectorXd w;        // n
  std::vector<int> label;   // zero-based model slot
};

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd neg_hessian;
};

double penalty(const Eigen::MatrixXd& beta, double ridge) {
  return ridge * beta.rightCols(beta.cols() - 1).squaredNorm();
}

// Linear scores for the M-1 non-reference categories -> probabilities of those categories.
void category_probs(const Eigen::MatrixXd& beta, const Eigen::Ref<const Eigen::RowVectorXd>& x, Eigen::VectorXd& eta,
                    Eigen::VectorXd& p, double& log_norm) {
  eta = beta * x.transpose();
  const double top = std::max(0.0, eta.maxCoeff());
  const double denom = std::exp(-top) + (eta.array() - top).exp().sum();
  log_norm = top + std::log(denom);
  p = (eta.array() - log_norm).exp();
}

double objective(const Design& des, const Eigen::MatrixXd& beta, double ridge) {
  const auto K = beta.rows();
  Eigen::VectorXd eta, p;
  double log_norm = 0.0;
  double f = 0.0;
  for (Eigen::Index i = 0; i < des.x.rows(); ++i) {
    category_probs(beta, des.x.row(i), eta, p, log_norm);
    const int y = des.label[static_cast<std::size_t>(i)];
    f += des.w[i] * ((y < K ? eta[y] : 0.0) - log_norm);
  }
  return f - penalty(beta, ridge);
}

Evaluation evaluate(const Design& des, const Eigen::MatrixXd& beta, double ridge) {
  const auto K = beta.rows();
  const auto P = beta.cols();
  Evaluation ev;
  ev.gradient = Eigen::VectorXd::Zero(K * P);
  ev.neg_hessian = Eigen::MatrixXd::Zero(K * P, K * P);
  Eigen::VectorXd eta, p;
  double log_norm = 0.0;
  double f = 0.0;
  for (Eigen::Index i = 0; i < des.x.rows(); ++i) {
    const auto x = des.x.row(i);
    category_probs(beta, x, eta, p, log_norm);
    const int y = des.label[static_cast<std::size_t>(i)];
    const double w = des.w[i];
    f += w * ((y < K ? eta[y] : 0.0) - log_norm);
    const Eigen::MatrixXd xx = w * (x.transpose() * x);
    for (Eigen::Index c = 0; c < K; ++c) {
      const double resid = (c == y ? 1.0 : 0.0) - p[c];
      ev.gradient.segment(c * P, P) += w * resid * x.transpose();
      for (Eigen::Index c2 = c; c2 < K; ++c2) {
        const double v = p[c] * ((c == c2 ? 1.0 : 0.0) - p[c2]);
        ev.neg_hessian.block(c * P, c2 * P, P, P) += v * xx;
      }
    }
  }
  for (Eigen::Index c = 0; c < K; ++c)
    for (Eigen::Index c2 = c + 1; c2 < K; ++c2)
      ev.neg_hessian.block(c2 * P, c * P, P, P) = ev.neg_hessian.block(c * P, c2 * P, P, P).transpose();
  for (Eigen::Index c = 0; c < K; ++c)
    for (Eigen::Index j = 1; j < P; ++j) {
      ev.gradient[c * P + j] -= 2.0 * ridge * beta(c, j);
      ev.neg_hessian(c * P + j, c * P + j) += 2.0 * ridge;
    }
  ev.objective = f - penalty(beta, ridge);
  return ev;
}

}  // namespace

LocalFit fit_local_multinomial(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& weights,
                               const LocalFitOptions& options) {
  if (static_cast<std::size_t>(weights.size()) != train.size())
    throw InvalidArgument("fit_local_multinomial: one weight per record required");
  if ((weights.array() < 0.0).any()) throw InvalidArgument("fit_local_multinomial: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw InvalidArgument("fit_local_multinomial: all weights are zero");

  const auto d = static_cast<Eigen::Index>(train.dim());
  const auto M = train.n_models();
  const auto K = static_cast<Eigen::Index>(M - 1);
  const auto P = d + 1;

  LocalFit fit;
  fit.weights_used = weights;
  fit.center = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < train.size(); ++i)
    if (weights[static_cast<Eigen::Index>(i)] > 0.0)
      fit.center += weights[static_cast<Eigen::Index>(i)] * train.stats_row(i).transpose();
  fit.center /= total;

  Design des;
  const auto n_pos = (weights.array() > 0.0).count();
  des.x.resize(n_pos, P);
  des.w.resize(n_pos);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double w = weights[static_cast<Eigen::Index>(i)];
    if (!(w > 0.0)) continue;
    des.x(r, 0) = 1.0;
    des.x.row(r).tail(d) = train.stats_row(i) - fit.center.transpose();
    des.w[r] = w;
    des.label.push_back(static_cast<int>(train.model(i).slot()));
    ++r;
  }

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(K, P);
  if (K == 0) {
    fit.coefficients = beta;
    fit.converged = true;
    return fit;
  }
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Evaluation ev = evaluate(des, beta, options.ridge);
    if (fit.objective_trace.empty()) fit.objective_trace.push_back(ev.objective);
    if (ev.gradient.norm() < options.gradient_tol) {
      fit.converged = true;
      break;
    }
    if (it == options.max_iterations) break;
    fit.iterations = it + 1;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.neg_hessian);
    Eigen::VectorXd step = ldlt.solve(ev.gradient);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      const double jitter = 1e-10 * std::max(1.0, ev.neg_hessian.diagonal().maxCoeff());
      step = (ev.neg_hessian + jitter * Eigen::MatrixXd::Identity(K * P, K * P)).ldlt().solve(ev.gradient);
    }
    // Newton decrement below the rounding level of the objective: stationary at working precision.
    if (ev.gradient.dot(step) <= 1e-12 * std::max(1.0, std::abs(ev.objective))) {
      fit.converged = true;
      break;
    }
    // Backtracking keeps the penalized objective non-decreasing.
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving, t *= 0.5) {
      Eigen::MatrixXd candidate = beta;
      for (Eigen::Index c = 0; c < K; ++c) candidate.row(c) += t * step.segment(c * P, P).transpose();
      const double f_new = objective(des, candidate, options.ridge);
      if (std::isfinite(f_new) && f_new >= ev.objective) {
        beta = std::move(candidate);
        fit.objective_trace.push_back(f_new);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent possible at working precision: stationary point.
      fit.converged = ev.gradient.norm() < std::sqrt(options.gradient_tol) * std::max(1.0, total);
      break;
    }
  }
  fit.coefficients = beta;
  if (!fit.converged)
    throw NonConvergence("fit_local_multinomial: no convergence after " + std::to_string(fit.iterations) +
                         " Newton iterations (separated data? increase the ridge)");
  if (options.ridge == 0.0 && -fit.objective_trace.back() <= 1e-8 * total)
    throw NonConvergence("fit_local_multinomial: weighted data are separated and the unpenalized fit diverges; "
                         "use a positive ridge");
  return fit;
}

Eigen::VectorXd predict_local_logit(const LocalFit& fit, const Eigen::Ref<const Eigen::VectorXd>& s_obs) {
  if (s_obs.size() != fit.center.size()) throw InvalidArgument("predict_local_logit: dimension mismatch");
  const auto K = fit.coefficients.rows();
  Eigen::VectorXd scores(K + 1);
  scores.head(K) = fit.coefficients.col(0) + fit.coefficients.rightCols(fit.coefficients.cols() - 1) * (s_obs - fit.center);
  scores[K] = 0.0;
  const double top = scores.maxCoeff();
  Eigen::VectorXd p = (scores.array() - top).exp();
  return p / p.sum();
}

Eigen::VectorXd local_logit_probabilities(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s_obs,
                                          Kernel kernel, double quantile, const LocalFitOptions& options) {
  const Eigen::VectorXd w = kernel_weights(train, s_obs, kernel, quantile);
  return predict_local_logit(fit_local_multinomial(train, w, options), s_obs);
}

}  // namespace abcmc
