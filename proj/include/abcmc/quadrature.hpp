#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace abcmc {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  /// Subdivision depth handed to the Gauss-Kronrod driver.
  unsigned max_depth = 20;
  /// Accepted relative error before reporting non-convergence.
  double max_rel_error = 1e-8;
  /// The integration domain is truncated where the integrand drops below peak * exp(log_floor).
  double log_floor = -690.7755278982137;  // log(1e-300)
};

struct LogIntegral {
  double log_value = 0.0;
  double rel_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// log of the integral of exp(log_f) over (lo, hi); either bound may be infinite.
/// log_f must be unimodal. `kinks` lists points where log_f is not smooth;
/// they become panel boundaries. Throws NonConvergence when the achieved
/// relative error exceeds options.max_rel_error.
LogIntegral log_integrate(const std::function<double(double)>& log_f, double lo, double hi,
                          std::vector<double> kinks = {}, const QuadratureOptions& options = {});

}  // namespace abcmc
