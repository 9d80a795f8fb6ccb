#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abcmc/config.hpp"

namespace abcmc {

/// Test-set figures of one seed of the three-model experiment.
struct ToySeedResult {
  std::uint64_t seed = 0;
  double bayes_error = 0.0;
  std::size_t k_star = 0;
  double knn_error = 0.0;
  /// Local logit error on the first loclogit.queries test records, with the
  /// exact-posterior error on the same records for comparison.
  double loclogit_error = 0.0;
  double loclogit_bayes_error = 0.0;
  std::size_t loclogit_queries = 0;
  std::size_t loclogit_failures = 0;
  double rf_error = 0.0;
  double rf_lda_error = 0.0;
  double oob_error = 0.0;
  /// Mean of rho(s) over the test set and its rank correlation with the
  /// exact posterior probability of the selected model missing.
  double mean_rho = 0.0;
  double rho_spearman = 0.0;
  bool posterior_in_range = true;
};

struct ToyReport {
  std::vector<ToySeedResult> seeds;
};

struct NoiseCell {
  std::uint64_t seed = 0;
  std::size_t noise = 0;
  double rf_error = 0.0;
  std::size_t knn_k = 0;
  double knn_error = 0.0;
};

struct NoiseReport {
  std::vector<NoiseCell> cells;
};

struct NlCell {
  std::string summary_mode;
  std::size_t n = 0;
  int true_model = 1;
  std::size_t replicate = 0;
  double p_normal = 0.0;
};

struct NlReport {
  std::vector<NlCell> cells;
  /// Median of p_normal over replicates for one (summary_mode, n, true_model).
  double median(const std::string& mode, std::size_t n, int true_model) const;
};

/// Each experiment writes its CSVs, config.ini and manifest.json into `out_dir`
/// (created if missing). Results depend only on the configuration, never on
/// the worker count. An empty `out_dir` skips writing.
ToyReport run_toy(const ExperimentConfig& config, const std::filesystem::path& out_dir);
NoiseReport run_noise(const ExperimentConfig& config, const std::filesystem::path& out_dir);
NlReport run_normal_laplace(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Writes manifest.json and config.ini for `experiment`.
void write_manifest(const ExperimentConfig& config, const std::string& experiment,
                    const std::vector<std::string>& outputs, const std::filesystem::path& out_dir);

}  // namespace abcmc
