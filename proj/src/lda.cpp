#include "abcmc/lda.hpp"

#include <Eigen/Eigenvalues>

namespace abcmc {

LdaProjector fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& labels, int n_classes) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw InvalidArgument("fit_lda: one label per row required");
  if (n_classes < 2) throw InvalidArgument("fit_lda: at least two models required");

  const auto K = static_cast<Eigen::Index>(n_classes);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(K, d);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= n_classes) throw InvalidArgument("fit_lda: label out of range");
    means.row(c) += x.row(i);
    counts[c] += 1.0;
  }
  for (Eigen::Index c = 0; c < K; ++c) {
    if (counts[c] < 2.0)
      throw InvalidArgument("fit_lda: model " + std::to_string(c + 1) + " has fewer than two records");
    means.row(c) /= counts[c];
  }
  const Eigen::VectorXd center = x.colwise().mean().transpose();

  Eigen::MatrixXd resid(n, d);
  for (Eigen::Index i = 0; i < n; ++i) resid.row(i) = x.row(i) - means.row(labels[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd within = resid.transpose() * resid;
  within /= static_cast<double>(n - K);

  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index c = 0; c < K; ++c) {
    const Eigen::VectorXd diff = means.row(c).transpose() - center;
    between.noalias() += counts[c] * diff * diff.transpose();
  }
  between /= static_cast<double>(K - 1);

  const double ridge = kLdaRegularization * within.trace() / static_cast<double>(d);
  within.diagonal().array() += ridge;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between, within);
  if (solver.info() != Eigen::Success) throw Error("fit_lda: generalized eigensolver failed");

  const Eigen::Index n_axes = std::min<Eigen::Index>(K - 1, d);
  LdaProjector proj;
  proj.center = center;
  proj.axes.resize(n_axes, d);
  proj.eigenvalues.resize(n_axes);
  for (Eigen::Index a = 0; a < n_axes; ++a) {
    const Eigen::Index src = d - 1 - a;  // eigenvalues come back ascending
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    v /= std::sqrt(v.dot(within * v));
    Eigen::Index top = 0;
    v.cwiseAbs().maxCoeff(&top);
    if (v[top] < 0.0) v = -v;
    proj.axes.row(a) = v.transpose();
    proj.eigenvalues[a] = std::max(0.0, solver.eigenvalues()[src]);
  }
  return proj;
}

LdaProjector fit_lda(const ReferenceTable& table) {
  std::vector<int> labels(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) labels[i] = static_cast<int>(table.model(i).slot());
  return fit_lda(Eigen::MatrixXd(table.stats()), labels, table.n_models());
}

Eigen::VectorXd project(const LdaProjector& projector, const Eigen::Ref<const Eigen::VectorXd>& s) {
  if (s.size() != projector.center.size()) throw InvalidArgument("project: dimension mismatch");
  return projector.axes * (s - projector.center);
}

Eigen::MatrixXd project_rows(const LdaProjector& projector, const Eigen::Ref<const Eigen::MatrixXd>& block) {
  if (block.cols() != projector.center.size()) throw InvalidArgument("project: dimension mismatch");
  return (block.rowwise() - projector.center.transpose()) * projector.axes.transpose();
}

ReferenceTable append_lda_columns(const ReferenceTable& table, const LdaProjector& projector) {
  const auto d = static_cast<Eigen::Index>(table.dim());
  const auto extra = projector.axes.rows();
  RowMatrix stats(table.stats().rows(), d + extra);
  stats.leftCols(d) = table.stats();
  stats.rightCols(extra) = project_rows(projector, table.stats());
  auto names = table.stat_names();
  for (Eigen::Index a = 0; a < extra; ++a) names.push_back("lda_" + std::to_string(a + 1));
  return table.with_stats(std::move(stats), std::move(names));
}

}  // namespace abcmc
