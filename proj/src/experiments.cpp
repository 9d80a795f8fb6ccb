#include "abcmc/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/version.hpp>
#include <json.hpp>

#include "abcmc/forest.hpp"
#include "abcmc/lda.hpp"
#include "abcmc/loclogit.hpp"
#include "abcmc/models.hpp"
#include "abcmc/neighbors.hpp"
#include "abcmc/posterior.hpp"
#include "abcmc/reftable.hpp"
#include "abcmc/rng.hpp"
#include "abcmc/stats.hpp"

namespace abcmc {

namespace {

// Child-stream indices under each experiment seed.
constexpr std::uint64_t kTableStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kForestStream = 3;
constexpr std::uint64_t kErrorForestStream = 5;
constexpr std::uint64_t kNoiseStream = 6;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& dir, const std::string& name, const std::string& header,
          std::vector<std::string>& outputs)
      : enabled_(!dir.empty()) {
    if (!enabled_) return;
    out_.open(dir / name);
    if (!out_) throw IoError("cannot write '" + (dir / name).string() + "'");
    out_ << header << '\n';
    outputs.push_back(name);
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    if (!enabled_) return;
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << field(fields)), ...);
    out_ << '\n';
  }

 private:
  static std::string field(double v) { return num(v); }
  static std::string field(const std::string& v) { return v; }
  static std::string field(const char* v) { return v; }
  template <typename T>
    requires std::is_integral_v<T>
  static std::string field(T v) {
    return std::to_string(v);
  }

  bool enabled_;
  std::ofstream out_;
};

void prepare_dir(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

SplitSizes split_sizes(const ExperimentConfig& config) {
  return {config.count("table.train"), config.count("table.calib"), config.count("table.test")};
}

ForestConfig forest_config(const ExperimentConfig& config, std::uint64_t seed, unsigned workers) {
  ForestConfig fc;
  fc.n_trees = config.count("forest.trees");
  fc.n_try = config.count("forest.ntry");
  fc.n_boot = config.count("forest.nboot");
  fc.min_node = config.count("forest.min_node");
  fc.max_depth = config.count("forest.max_depth");
  fc.seed = seed;
  fc.workers = workers;
  return fc;
}

std::vector<std::size_t> k_grid(const ExperimentConfig& config, std::size_t n_train) {
  std::vector<std::size_t> grid;
  for (auto k : config.counts("knn.grid"))
    if (k >= 1 && k <= n_train) grid.push_back(k);
  if (grid.empty()) throw InvalidArgument("knn.grid has no k within [1, " + std::to_string(n_train) + "]");
  return grid;
}

bool has_method(const ExperimentConfig& config, const std::string& method) {
  const auto methods = config.words("experiment.methods");
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

unsigned worker_count(const ExperimentConfig& config) {
  return static_cast<unsigned>(std::max<std::size_t>(1, config.count("experiment.workers")));
}

/// Raw summaries followed by the LDA coordinates of their standardized values.
ReferenceTable with_lda(const ReferenceTable& raw, const ReferenceTable& standardized, const LdaProjector& lda) {
  const Eigen::MatrixXd proj = project_rows(lda, standardized.stats());
  RowMatrix stats(raw.size(), raw.dim() + static_cast<std::size_t>(proj.cols()));
  stats << raw.stats(), proj;
  auto names = raw.stat_names();
  for (Eigen::Index a = 0; a < proj.cols(); ++a) names.push_back("lda_" + std::to_string(a + 1));
  return raw.with_stats(std::move(stats), std::move(names));
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

void write_manifest(const ExperimentConfig& config, const std::string& experiment,
                    const std::vector<std::string>& outputs, const std::filesystem::path& out_dir) {
  if (out_dir.empty()) return;
  nlohmann::json j;
  j["tool"] = "abcmc";
  j["version"] = "1.0.0";
  j["experiment"] = experiment;
  j["config"] = nlohmann::json::parse(config.to_json());
  j["seeds"] = config.seeds("experiment.seeds");
  j["outputs"] = outputs;
  j["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in '" + out_dir.string() + "'");
  out << j.dump(2) << '\n';
  std::ofstream ini(out_dir / "config.ini");
  if (!ini) throw IoError("cannot write config.ini in '" + out_dir.string() + "'");
  ini << config.to_ini();
}

ToyReport run_toy(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir);
  const SuiteThree suite;
  const std::size_t n = config.count("suite.n");
  const SplitSizes sizes = split_sizes(config);
  const unsigned workers = worker_count(config);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  const bool run_knn = has_method(config, "knn");
  const bool run_loclogit = has_method(config, "loclogit");
  const bool run_rf = has_method(config, "rf");

  std::vector<std::string> outputs;
  CsvFile errors(out_dir, "errors.csv", "seed,method,error", outputs);
  CsvFile calibration(out_dir, "calibration.csv", "seed,k,error", outputs);
  CsvFile scatter(out_dir, "test_posteriors.csv",
                  "seed,index,true_model,exact_1,exact_2,exact_3,knn_1,knn_2,knn_3,rf_map,rf_votes_1,rf_votes_2,"
                  "rf_votes_3,rho,posterior_prob",
                  outputs);
  CsvFile loclogit_csv(out_dir, "loclogit.csv", "seed,index,true_model,exact_1,exact_2,exact_3,p_1,p_2,p_3", outputs);
  CsvFile lda_csv(out_dir, "lda_projection.csv", "seed,index,true_model,lda_1,lda_2", outputs);
  CsvFile importance_csv(out_dir, "importance.csv", "seed,forest,stat_name,importance", outputs);

  ToyReport report;
  for (const std::uint64_t seed : config.seeds("experiment.seeds")) {
    ToySeedResult r;
    r.seed = seed;
    TableOptions topt;
    topt.workers = workers;
    const auto table = build_reference_table(suite, sizes.train + sizes.calib + sizes.test, n,
                                             child_seed(seed, kTableStream), topt);
    const auto parts = split(table, sizes, child_seed(seed, kSplitStream));
    const auto& train = parts.train;
    const auto& test = parts.test;
    const std::size_t n_test = test.size();

    std::vector<Eigen::VectorXd> exact(n_test);
    std::vector<ModelIndex> bayes(n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      exact[i] = exact_posterior_from_summaries(test.stats_row(i).transpose(), n, uniform);
      bayes[i] = argmax_model(exact[i]);
    }
    r.bayes_error = prior_error_rate(bayes, test);
    errors.row(seed, "bayes", r.bayes_error);

    const auto standardized = standardize(train);
    const auto& train_z = standardized.table;
    const auto calib_z = standardized.scaling.apply(parts.calib);
    const auto test_z = standardized.scaling.apply(test);

    std::vector<Eigen::VectorXd> knn_freqs(n_test, Eigen::VectorXd::Zero(3));
    if (run_knn) {
      std::size_t k = config.count("knn.k");
      if (k == 0) {
        const auto curve = calibrate_k(train_z, calib_z, k_grid(config, train.size()), workers);
        for (std::size_t g = 0; g < curve.grid.size(); ++g) calibration.row(seed, curve.grid[g], curve.errors[g]);
        k = curve.k_star;
      }
      r.k_star = k;
      std::vector<ModelIndex> pred(n_test);
      parallel_for(n_test, workers, [&](std::size_t i) {
        const auto res = knn_classify(train_z, test_z.stats_row(i).transpose(), k);
        knn_freqs[i] = res.freqs;
        pred[i] = res.map;
      });
      r.knn_error = prior_error_rate(pred, test);
      errors.row(seed, "knn", r.knn_error);
    }

    if (run_loclogit) {
      const std::size_t queries = std::min(n_test, config.count("loclogit.queries"));
      const double quantile = config.real("loclogit.quantile");
      LocalFitOptions lopt;
      lopt.ridge = config.real("loclogit.ridge");
      std::vector<Eigen::VectorXd> probs(queries);
      std::vector<char> failed(queries, 0);
      parallel_for(queries, workers, [&](std::size_t i) {
        try {
          probs[i] = local_logit_probabilities(train_z, test_z.stats_row(i).transpose(), Kernel::Epanechnikov,
                                               quantile, lopt);
        } catch (const NonConvergence&) {
          failed[i] = 1;
        }
      });
      std::size_t wrong = 0, bayes_wrong = 0, used = 0;
      for (std::size_t i = 0; i < queries; ++i) {
        if (failed[i]) {
          ++r.loclogit_failures;
          continue;
        }
        ++used;
        wrong += argmax_model(probs[i]) != test.model(i);
        bayes_wrong += bayes[i] != test.model(i);
        loclogit_csv.row(seed, i, test.model(i).value, exact[i][0], exact[i][1], exact[i][2], probs[i][0],
                         probs[i][1], probs[i][2]);
      }
      r.loclogit_queries = used;
      if (used > 0) {
        r.loclogit_error = static_cast<double>(wrong) / static_cast<double>(used);
        r.loclogit_bayes_error = static_cast<double>(bayes_wrong) / static_cast<double>(used);
      }
      errors.row(seed, "loclogit", r.loclogit_error);
      errors.row(seed, "loclogit_bayes", r.loclogit_bayes_error);
    }

    if (run_rf) {
      const auto rf = grow_forest(train, ForestKind::Classification,
                                  forest_config(config, child_seed(seed, kForestStream), workers));
      r.rf_error = prior_error_rate(predict_all(rf, test, workers), test);
      r.oob_error = oob_error(rf, train);
      errors.row(seed, "rf", r.rf_error);
      errors.row(seed, "rf_oob", r.oob_error);

      const auto imp = variable_importance(rf);
      for (std::size_t j = 0; j < train.dim(); ++j)
        importance_csv.row(seed, "rf", train.stat_names()[j], imp[static_cast<Eigen::Index>(j)]);

      ForestConfig ecfg;
      ecfg.n_trees = config.count("forest.error_trees");
      ecfg.seed = child_seed(seed, kErrorForestStream);
      ecfg.workers = workers;
      const auto labels = oob_misclassification_labels(rf, train);
      const auto rho_forest = grow_error_regressor(train, labels, ecfg);

      std::vector<PosteriorReport> post(n_test);
      parallel_for(n_test, workers,
                   [&](std::size_t i) { post[i] = map_posterior(rf, rho_forest, test.stats_row(i).transpose()); });
      Eigen::VectorXd rho(static_cast<Eigen::Index>(n_test)), exact_miss(static_cast<Eigen::Index>(n_test));
      for (std::size_t i = 0; i < n_test; ++i) {
        const auto& p = post[i];
        const auto ii = static_cast<Eigen::Index>(i);
        rho[ii] = p.rho;
        exact_miss[ii] = 1.0 - exact[i][static_cast<Eigen::Index>(p.map_model.slot())];
        if (!(p.posterior_prob >= 0.0 && p.posterior_prob <= 1.0)) r.posterior_in_range = false;
        scatter.row(seed, i, test.model(i).value, exact[i][0], exact[i][1], exact[i][2], knn_freqs[i][0],
                    knn_freqs[i][1], knn_freqs[i][2], p.map_model.value, p.votes[0], p.votes[1], p.votes[2], p.rho,
                    p.posterior_prob);
      }
      r.mean_rho = rho.mean();
      r.rho_spearman = spearman(rho, exact_miss);
      errors.row(seed, "mean_rho", r.mean_rho);

      if (config.flag("experiment.lda")) {
        const auto lda = fit_lda(train_z);
        const auto train_lda = with_lda(train, train_z, lda);
        const auto test_lda = with_lda(test, test_z, lda);
        const auto rf_lda = grow_forest(train_lda, ForestKind::Classification,
                                        forest_config(config, child_seed(seed, kForestStream), workers));
        r.rf_lda_error = prior_error_rate(predict_all(rf_lda, test_lda, workers), test_lda);
        errors.row(seed, "rf_lda", r.rf_lda_error);
        const auto imp_lda = variable_importance(rf_lda);
        for (std::size_t j = 0; j < train_lda.dim(); ++j)
          importance_csv.row(seed, "rf_lda", train_lda.stat_names()[j], imp_lda[static_cast<Eigen::Index>(j)]);
        for (std::size_t i = 0; i < n_test; ++i) {
          const auto row = test_lda.stats_row(i);
          lda_csv.row(seed, i, test.model(i).value, row[3], row[4]);
        }
      }
    }
    report.seeds.push_back(r);
  }
  write_manifest(config, "toy", outputs, out_dir);
  return report;
}

NoiseReport run_noise(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir);
  const SuiteThree suite;
  const std::size_t n = config.count("suite.n");
  const SplitSizes sizes = split_sizes(config);
  const unsigned workers = worker_count(config);
  const auto noise_counts = config.counts("experiment.noise");
  if (noise_counts.empty()) throw InvalidArgument("experiment.noise is empty");
  const std::size_t max_noise = *std::max_element(noise_counts.begin(), noise_counts.end());
  const bool run_knn = has_method(config, "knn");
  const bool run_rf = has_method(config, "rf");

  std::vector<std::string> outputs;
  CsvFile rf_csv(out_dir, "rf_noise.csv", "seed,noise,error", outputs);
  CsvFile knn_csv(out_dir, "knn_noise.csv", "seed,noise,k,error", outputs);

  NoiseReport report;
  for (const std::uint64_t seed : config.seeds("experiment.seeds")) {
    TableOptions topt;
    topt.workers = workers;
    const auto base = build_reference_table(suite, sizes.train + sizes.calib + sizes.test, n,
                                            child_seed(seed, kTableStream), topt);
    const auto parts =
        split(augment_noise(base, max_noise, child_seed(seed, kNoiseStream)), sizes, child_seed(seed, kSplitStream));
    for (const std::size_t count : noise_counts) {
      NoiseCell cell;
      cell.seed = seed;
      cell.noise = count;
      const auto cols = iota(base.dim() + count);
      const auto train = parts.train.select_columns(cols);
      const auto test = parts.test.select_columns(cols);
      if (run_rf) {
        const auto rf = grow_forest(train, ForestKind::Classification,
                                    forest_config(config, child_seed(seed, kForestStream), workers));
        cell.rf_error = prior_error_rate(predict_all(rf, test, workers), test);
        rf_csv.row(seed, count, cell.rf_error);
      }
      if (run_knn) {
        const auto standardized = standardize(train);
        const auto calib_z = standardized.scaling.apply(parts.calib.select_columns(cols));
        const auto test_z = standardized.scaling.apply(test);
        std::size_t k = config.count("knn.k");
        if (k == 0) k = calibrate_k(standardized.table, calib_z, k_grid(config, train.size()), workers).k_star;
        cell.knn_k = k;
        cell.knn_error = prior_error_rate(knn_predict_all(standardized.table, test_z, k, workers), test);
        knn_csv.row(seed, count, k, cell.knn_error);
      }
      report.cells.push_back(cell);
    }
  }
  write_manifest(config, "noise", outputs, out_dir);
  return report;
}

double NlReport::median(const std::string& mode, std::size_t n, int true_model) const {
  std::vector<double> values;
  for (const auto& c : cells)
    if (c.summary_mode == mode && c.n == n && c.true_model == true_model) values.push_back(c.p_normal);
  if (values.empty()) throw InvalidArgument("no normal-laplace cells for " + mode);
  return detail::median_inplace(values);
}

NlReport run_normal_laplace(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  prepare_dir(out_dir);
  const SuiteNormalLaplace suite(NlSummary::All);
  const unsigned workers = worker_count(config);
  const auto sizes = config.counts("nl.sizes");
  const std::size_t replicates = config.count("nl.replicates");
  const std::size_t simulations = config.count("nl.simulations");
  const std::size_t k = config.count("nl.neighbors");
  const std::uint64_t seed = config.seeds("experiment.seeds").front();
  const auto mode_names = config.words("nl.modes");

  std::vector<NlSummary> modes;
  std::vector<std::vector<std::size_t>> mode_cols;
  for (const auto& name : mode_names) {
    const auto mode = parse_nl_summary(name);
    if (mode == NlSummary::MeanMedianVariance) mode_cols.push_back({0, 1, 2});
    else if (mode == NlSummary::Mad) mode_cols.push_back({3});
    else mode_cols.push_back({0, 1, 2, 3});
    modes.push_back(mode);
  }
  if (k == 0 || k > simulations) throw InvalidArgument("nl.neighbors must lie in [1, nl.simulations]");

  std::vector<std::string> outputs;
  CsvFile csv(out_dir, "normal_laplace.csv", "summary_mode,n,true_model,replicate,p_normal", outputs);

  NlReport report;
  for (const std::size_t n : sizes) {
    // Per replicate: [mode][true model - 1].
    std::vector<std::vector<std::array<double, 2>>> p(replicates);
    parallel_for(replicates, workers, [&](std::size_t rep) {
      const std::uint64_t cell_seed = child_seed(child_seed(seed, n), rep);
      TableOptions topt;
      topt.balanced = true;
      const auto table = build_reference_table(suite, simulations, n, child_seed(cell_seed, 0), topt);
      std::array<Eigen::VectorXd, 2> observed;
      for (int m = 1; m <= 2; ++m) {
        auto rng = child_engine(cell_seed, static_cast<std::uint64_t>(m));
        const double theta = suite.draw_parameter(ModelIndex(m), rng);
        observed[m - 1] = suite.summarize(suite.simulate(ModelIndex(m), theta, n, rng));
      }
      p[rep].resize(modes.size());
      for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        const auto standardized = standardize(table.select_columns(mode_cols[mi]));
        for (int m = 0; m < 2; ++m) {
          Eigen::VectorXd s(static_cast<Eigen::Index>(mode_cols[mi].size()));
          for (std::size_t j = 0; j < mode_cols[mi].size(); ++j)
            s[static_cast<Eigen::Index>(j)] = observed[m][static_cast<Eigen::Index>(mode_cols[mi][j])];
          p[rep][mi][m] = knn_classify(standardized.table, standardized.scaling.apply(s), k).freqs[0];
        }
      }
    });
    for (std::size_t mi = 0; mi < modes.size(); ++mi)
      for (int m = 1; m <= 2; ++m)
        for (std::size_t rep = 0; rep < replicates; ++rep) {
          NlCell cell{to_string(modes[mi]), n, m, rep, p[rep][mi][m - 1]};
          csv.row(cell.summary_mode, n, m, rep, cell.p_normal);
          report.cells.push_back(cell);
        }
  }
  write_manifest(config, "normal-laplace", outputs, out_dir);
  return report;
}

}  // namespace abcmc
