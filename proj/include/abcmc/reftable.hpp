#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcmc/core.hpp"
#include "abcmc/models.hpp"

namespace abcmc {

struct ReferenceRecord {
  ModelIndex model;
  Eigen::VectorXd params;
  Eigen::VectorXd stats;
};

/// Simulated (model, parameters, summaries) records drawn from the prior
/// predictive. Immutable once built; all records share the summary dimension.
class ReferenceTable {
 public:
  ReferenceTable() = default;
  ReferenceTable(int n_models, std::vector<ModelIndex> models, RowMatrix params, RowMatrix stats,
                 std::vector<std::string> param_names, std::vector<std::string> stat_names, std::string suite_id = {},
                 std::uint64_t seed = 0);

  std::size_t size() const { return models_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(stats_.cols()); }
  int n_models() const { return n_models_; }

  ModelIndex model(std::size_t i) const { return models_[i]; }
  const std::vector<ModelIndex>& models() const { return models_; }
  const RowMatrix& params() const { return params_; }
  const RowMatrix& stats() const { return stats_; }
  auto stats_row(std::size_t i) const { return stats_.row(static_cast<Eigen::Index>(i)); }
  const std::vector<std::string>& param_names() const { return param_names_; }
  const std::vector<std::string>& stat_names() const { return stat_names_; }
  const std::string& suite_id() const { return suite_id_; }
  std::uint64_t seed() const { return seed_; }

  ReferenceRecord record(std::size_t i) const;
  /// Records per model, indexed by ModelIndex::slot().
  std::vector<std::size_t> counts() const;

  /// Records at `rows`, in that order.
  ReferenceTable subset(const std::vector<std::size_t>& rows) const;
  /// Same records with the summary columns at `cols`.
  ReferenceTable select_columns(const std::vector<std::size_t>& cols) const;
  /// Same records with a replacement summary block.
  ReferenceTable with_stats(RowMatrix stats, std::vector<std::string> stat_names) const;

  friend bool operator==(const ReferenceTable& a, const ReferenceTable& b);

 private:
  int n_models_ = 0;
  std::vector<ModelIndex> models_;
  RowMatrix params_;
  RowMatrix stats_;
  std::vector<std::string> param_names_;
  std::vector<std::string> stat_names_;
  std::string suite_id_;
  std::uint64_t seed_ = 0;
};

struct TableOptions {
  /// Model prior; empty means uniform over 1..M.
  std::vector<double> prior_weights;
  /// Assign models round-robin (record i gets model i mod M + 1) instead of drawing them.
  bool balanced = false;
  unsigned workers = 1;
  /// Simulator attempts per record before giving up.
  int max_retries = 100;
};

/// N records: model ~ prior, theta ~ pi_m, y ~ f_m(.|theta) with |y| = n, s = S(y).
/// Record i uses child stream i of `seed`, so the table is independent of the worker count.
ReferenceTable build_reference_table(const ModelSuite& suite, std::size_t N, std::size_t n, std::uint64_t seed,
                                     const TableOptions& options = {});

/// Per-column affine map s -> (s - center) / scale.
struct ScalingParams {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& s) const;
  Eigen::VectorXd invert(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  RowMatrix apply_rows(const RowMatrix& block) const;
  ReferenceTable apply(const ReferenceTable& table) const;
};

struct Standardized {
  ReferenceTable table;
  ScalingParams scaling;
};

/// Median / MAD standardization of every summary column. Throws InvalidArgument
/// naming the first column with zero MAD.
Standardized standardize(const ReferenceTable& table);

/// Appends `count` i.i.d. N(0,1) columns named noise_1..noise_count. Column j
/// uses child stream j of `seed`, so smaller counts are prefixes of larger ones.
ReferenceTable augment_noise(const ReferenceTable& table, std::size_t count, std::uint64_t seed);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t calib = 0;
  std::size_t test = 0;
};

struct TableSplit {
  ReferenceTable train;
  ReferenceTable calib;
  ReferenceTable test;
};

/// Disjoint train/calib/test tables from a seeded permutation of the rows.
TableSplit split(const ReferenceTable& table, SplitSizes sizes, std::uint64_t seed);

/// Header `model,param_<name>...,stat_<name>...`, shortest round-trip float text.
void save_csv(const ReferenceTable& table, const std::filesystem::path& path);
void write_csv(const ReferenceTable& table, std::ostream& out);

/// Throws ParseError citing the offending line. The model count is the
/// largest model index present unless `n_models` is given.
ReferenceTable load_csv(const std::filesystem::path& path, int n_models = 0);
ReferenceTable read_csv(std::istream& in, int n_models = 0);

}  // namespace abcmc
