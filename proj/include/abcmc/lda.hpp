#pragma once

#include <vector>

#include <Eigen/Dense>

#include "abcmc/reftable.hpp"

namespace abcmc {

/// Affine map s -> axes * (s - center) onto the M-1 discriminant coordinates.
struct LdaProjector {
  Eigen::MatrixXd axes;         // (M-1) x d
  Eigen::VectorXd center;       // d
  Eigen::VectorXd eigenvalues;  // M-1, nonincreasing

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }
};

/// Relative ridge added to the within-class covariance, times trace / d.
inline constexpr double kLdaRegularization = 1e-8;

/// Fisher discriminant axes for `labels` (zero-based, < n_classes) on the
/// rows of `x`. Axes solve the generalized eigenproblem of the between-class
/// against the within-class covariance and have unit within-class variance;
/// each axis's largest-magnitude coordinate is positive.
LdaProjector fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& labels, int n_classes);

LdaProjector fit_lda(const ReferenceTable& table);

Eigen::VectorXd project(const LdaProjector& projector, const Eigen::Ref<const Eigen::VectorXd>& s);

/// Projects every row of `block`.
Eigen::MatrixXd project_rows(const LdaProjector& projector, const Eigen::Ref<const Eigen::MatrixXd>& block);

/// Appends the M-1 projections as lda_1..lda_{M-1}.
ReferenceTable append_lda_columns(const ReferenceTable& table, const LdaProjector& projector);

}  // namespace abcmc
