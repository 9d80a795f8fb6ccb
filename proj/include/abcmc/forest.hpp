#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/reftable.hpp"
#include "abcmc/rng.hpp"

namespace abcmc {

enum class ForestKind { Classification, Regression };

/// Zero fields are resolved per kind by resolve_config.
struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t n_try = 0;      ///< ceil(sqrt d) for classification, ceil(d/3) for regression
  std::size_t n_boot = 0;     ///< N
  std::size_t min_node = 0;   ///< 1 for classification, 5 for regression
  std::size_t max_depth = 0;  ///< unlimited
  bool replace = true;        ///< bootstrap with replacement; without, n_boot rows are subsampled
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Fills defaults and checks 1 <= n_try <= d, 1 <= n_boot <= N, n_trees >= 1.
ForestConfig resolve_config(ForestConfig config, ForestKind kind, std::size_t n_records, std::size_t dim);

/// Column-major copy of the covariates plus the response being learned.
struct TrainingData {
  Eigen::MatrixXd x;
  std::vector<int> labels;  ///< model slot per record (classification)
  Eigen::VectorXd response; ///< real response per record (regression)
  int n_classes = 0;
  /// Dense rank of each value within its column, column-major like x.
  std::vector<std::uint32_t> ranks;

  static TrainingData classification(const ReferenceTable& table);
  static TrainingData regression(const ReferenceTable& table, const Eigen::Ref<const Eigen::VectorXd>& response);
  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  void compute_ranks();
};

/// Gini impurity 1 - sum (c_m / sum c)^2.
template <typename Derived>
double gini(const Eigen::DenseBase<Derived>& counts) {
  const double total = counts.derived().sum();
  if ((counts.derived().array() < 0).any() || !(total > 0))
    throw InvalidArgument("gini: counts must be nonnegative and not all zero");
  return 1.0 - (counts.derived().template cast<double>().array() / total).square().sum();
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// Impurity of the node minus the size-weighted impurity of the children.
  double impurity_decrease = 0.0;
};

/// Exhaustive scan over midpoints between consecutive distinct values of each
/// candidate feature. `weights` holds per-row multiplicities (parallel to `rows`).
/// Ties go to the lower feature index, then the lower threshold. Returns nothing
/// when no split decreases impurity.
std::optional<Split> best_split(const TrainingData& data, ForestKind kind, std::span<const std::uint32_t> rows,
                                std::span<const double> weights, std::span<const std::size_t> candidate_features);

struct TreeNode {
  double threshold = 0.0;
  /// Leaf: predicted model slot (classification) or mean response. Internal: impurity decrease of the split.
  double value = 0.0;
  std::int32_t feature = -1;
  /// Internal nodes route s to `left` iff s[feature] < threshold, else to left + 1.
  std::uint32_t left = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  /// Per feature: sum over its splits of (node size / root size) * impurity decrease.
  Eigen::VectorXd importance;

  std::size_t leaf_index(const double* s) const;
  double predict(const double* s) const { return nodes[leaf_index(s)].value; }
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Grows one randomized CART on `sample`, a multiset of record indices.
/// n_try features are drawn without replacement at each node from `rng`.
Tree grow_tree(const TrainingData& data, ForestKind kind, std::span<const std::uint32_t> sample,
               const ForestConfig& resolved, Engine& rng);

class Forest {
 public:
  ForestKind kind = ForestKind::Classification;
  ForestConfig config;
  int n_models = 0;
  std::size_t dim = 0;
  std::size_t n_records = 0;
  std::vector<Tree> trees;
  /// Sorted bootstrap multiset of each tree.
  std::vector<std::vector<std::uint32_t>> membership;

  /// Per-model vote counts; sums to the number of trees.
  Eigen::VectorXd votes(const Eigen::Ref<const Eigen::VectorXd>& s) const;
  /// Majority vote; ties go to the smaller model index.
  ModelIndex predict_class(const Eigen::Ref<const Eigen::VectorXd>& s) const;
  /// Mean of the tree outputs (regression).
  double predict_value(const Eigen::Ref<const Eigen::VectorXd>& s) const;
};

/// Classification forest on the table's model indices. Tree b uses child stream b of config.seed.
Forest grow_forest(const ReferenceTable& table, ForestKind kind, ForestConfig config);
/// Regression forest on an arbitrary per-record response.
Forest grow_regression_forest(const ReferenceTable& table, const Eigen::Ref<const Eigen::VectorXd>& response,
                              ForestConfig config);
Forest grow_forest(const TrainingData& data, ForestKind kind, ForestConfig config);

std::vector<ModelIndex> predict_all(const Forest& forest, const ReferenceTable& queries, unsigned workers = 1);

struct OobResult {
  /// Per record: majority vote over trees whose bootstrap excluded it, if any.
  std::vector<std::optional<ModelIndex>> predictions;
  std::vector<std::size_t> skipped;
  double error_rate = 0.0;
};

/// Out-of-bag predictions and error for the table the forest was grown on.
OobResult oob_predictions(const Forest& forest, const ReferenceTable& table);
double oob_error(const Forest& forest, const ReferenceTable& table);

/// Mean over trees of Tree::importance.
Eigen::VectorXd variable_importance(const Forest& forest);
void write_importance_csv(const Eigen::Ref<const Eigen::VectorXd>& importance, const std::vector<std::string>& names,
                          std::ostream& out);

/// Versioned text format; predictions round-trip exactly.
void save_forest(const Forest& forest, std::ostream& out);
Forest load_forest(std::istream& in);

}  // namespace abcmc
