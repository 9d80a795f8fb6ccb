// Command line front end: simulate, classify, calibrate-k, marginals and experiment.
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abcmc/config.hpp"
#include "abcmc/experiments.hpp"
#include "abcmc/forest.hpp"
#include "abcmc/loclogit.hpp"
#include "abcmc/models.hpp"
#include "abcmc/neighbors.hpp"
#include "abcmc/posterior.hpp"
#include "abcmc/quadrature.hpp"
#include "abcmc/reftable.hpp"

namespace {

using namespace abcmc;

constexpr int kComputationError = 1;
constexpr int kUsageError = 2;

/// Errors in what the user supplied (files, flags, configuration).
class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<double> parse_numbers(const std::string& line) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(line);
  while (in >> token) {
    std::string field;
    std::istringstream parts(token);
    while (std::getline(parts, field, ',')) {
      if (field.empty()) continue;
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError(0, "'" + field + "' is not a number");
      out.push_back(v);
    }
  }
  return out;
}

/// First numeric row of a CSV of summaries; a leading header row is skipped.
Eigen::VectorXd read_observation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open observation file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto v = parse_numbers(line);
      return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const ParseError& e) {
      if (line_no > 1) throw ParseError(line_no, e.what());
    }
  }
  throw ParseError(line_no, "observation file has no numeric row");
}

/// Whitespace- or comma-separated sample values.
Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      const auto v = parse_numbers(line);
      values.insert(values.end(), v.begin(), v.end());
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (values.empty()) throw ParseError(line_no, "dataset file is empty");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_numbers(text)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw UsageError("'" + text + "' is not a list of nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  out << text;
}

struct SimulateArgs {
  std::string suite = "toy3";
  std::string summary = "mmv";
  std::size_t n = 20;
  std::size_t rows = 31000;
  std::size_t noise = 0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool balanced = false;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  std::unique_ptr<ModelSuite> suite;
  try {
    suite = make_suite(a.suite, parse_nl_summary(a.summary));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  TableOptions opt;
  opt.workers = a.workers;
  opt.balanced = a.balanced;
  auto table = build_reference_table(*suite, a.rows, a.n, child_seed(a.seed, 1), opt);
  if (a.noise > 0) table = augment_noise(table, a.noise, child_seed(a.seed, 6));
  if (a.out.empty()) {
    write_csv(table, std::cout);
  } else {
    save_csv(table, a.out);
  }
  return 0;
}

struct ClassifyArgs {
  std::string train;
  std::string obs;
  std::string dataset;
  std::string suite = "toy3";
  std::string summary = "mmv";
  std::string method = "rf";
  std::size_t k = 0;
  std::size_t trees = 500;
  std::size_t ntry = 0;
  double quantile = 0.01;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out;
};

PosteriorReport classify_knn(const ReferenceTable& table, const Eigen::VectorXd& s, const ClassifyArgs& a) {
  const std::size_t hold = std::min<std::size_t>(1000, table.size() / 5);
  if (hold == 0) throw InvalidArgument("k-NN classification needs at least 5 reference records");
  const auto parts = split(table, {table.size() - hold, hold, 0}, child_seed(a.seed, 2));
  const auto standardized = standardize(parts.train);
  const auto hold_z = standardized.scaling.apply(parts.calib);
  const Eigen::VectorXd s_z = standardized.scaling.apply(s);
  std::size_t k = a.k;
  if (k == 0) k = calibrate_k(standardized.table, hold_z, default_k_grid(parts.train.size()), a.workers).k_star;
  if (k > parts.train.size()) throw InvalidArgument("k exceeds the number of training records");
  const auto res = knn_classify(standardized.table, s_z, k);
  PosteriorReport report;
  report.map_model = res.map;
  report.votes = res.freqs;
  report.rho = LocalErrorEstimator(standardized.table, k, hold_z, a.workers).at_quantile(s_z);
  report.posterior_prob = 1.0 - report.rho;
  return report;
}

PosteriorReport classify_loclogit(const ReferenceTable& table, const Eigen::VectorXd& s, const ClassifyArgs& a) {
  const auto standardized = standardize(table);
  const Eigen::VectorXd p = local_logit_probabilities(standardized.table, standardized.scaling.apply(s),
                                                      Kernel::Epanechnikov, a.quantile);
  PosteriorReport report;
  report.map_model = argmax_model(p);
  report.votes = p;
  report.posterior_prob = p[static_cast<Eigen::Index>(report.map_model.slot())];
  report.rho = 1.0 - report.posterior_prob;
  return report;
}

PosteriorReport classify_rf(const ReferenceTable& table, const Eigen::VectorXd& s, const ClassifyArgs& a) {
  ForestConfig cfg;
  cfg.n_trees = a.trees;
  cfg.n_try = a.ntry;
  cfg.seed = child_seed(a.seed, 3);
  cfg.workers = a.workers;
  const auto rf = grow_forest(table, ForestKind::Classification, cfg);
  ForestConfig ecfg;
  ecfg.n_trees = a.trees;
  ecfg.seed = child_seed(a.seed, 5);
  ecfg.workers = a.workers;
  const auto rho = grow_error_regressor(table, oob_misclassification_labels(rf, table), ecfg);
  return map_posterior(rf, rho, s);
}

int run_classify(const ClassifyArgs& a) {
  const auto table = load_csv(a.train);
  Eigen::VectorXd s;
  if (!a.obs.empty()) {
    s = read_observation(a.obs);
  } else {
    std::unique_ptr<ModelSuite> suite;
    try {
      suite = make_suite(a.suite, parse_nl_summary(a.summary));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    s = suite->summarize(read_dataset(a.dataset));
  }
  if (static_cast<std::size_t>(s.size()) != table.dim())
    throw InvalidArgument("dimension mismatch: observation has " + std::to_string(s.size()) +
                          " summaries, reference table has " + std::to_string(table.dim()));
  PosteriorReport report;
  if (a.method == "knn") report = classify_knn(table, s, a);
  else if (a.method == "loclogit") report = classify_loclogit(table, s, a);
  else report = classify_rf(table, s, a);
  emit(report.to_json() + "\n", a.out);
  return 0;
}

struct CalibrateArgs {
  std::string train;
  std::string calib;
  std::string grid;
  unsigned workers = 1;
  std::string out;
};

int run_calibrate(const CalibrateArgs& a) {
  const auto train = load_csv(a.train);
  const auto calib = load_csv(a.calib, train.n_models());
  if (calib.dim() != train.dim()) throw InvalidArgument("calibration and training tables have different summaries");
  const auto standardized = standardize(train);
  std::vector<std::size_t> grid = a.grid.empty() ? default_k_grid(train.size()) : parse_counts(a.grid);
  const auto curve = calibrate_k(standardized.table, standardized.scaling.apply(calib), grid, a.workers);
  std::ostringstream out;
  write_calibration_csv(curve, out);
  emit(out.str(), a.out);
  std::cerr << "k* = " << curve.k_star << '\n';
  return 0;
}

struct MarginalsArgs {
  std::string dataset;
  bool verbatim = false;
  std::string out;
};

int run_marginals(const MarginalsArgs& a) {
  const auto y = read_dataset(a.dataset);
  const SuiteThree suite;
  const Eigen::Vector3d summaries = summaries_three(y);
  const auto n = static_cast<std::size_t>(y.size());
  nlohmann::json models = nlohmann::json::array();
  Eigen::Vector3d logs;
  for (int m = 1; m <= 3; ++m) {
    const double closed = log_marginal_three(ModelIndex(m), summaries, n).log_value;
    const double quad = quadrature_marginal(suite, ModelIndex(m), y).log_value;
    logs[m - 1] = closed;
    models.push_back({{"model", m}, {"closed_form", closed}, {"quadrature", quad}, {"difference", closed - quad}});
  }
  nlohmann::json j{{"n", n}, {"log_marginals", models}};
  const auto post = posterior_from_log_marginals(logs, Eigen::Vector3d::Constant(1.0 / 3.0));
  j["posterior"] = std::vector<double>(post.begin(), post.end());
  if (a.verbatim) {
    const double printed = log_marginal_two_verbatim(summaries, n).log_value;
    const double quad = models[1]["quadrature"].get<double>();
    j["verbatim_model_2"] = {{"log_marginal", printed}, {"quadrature", quad}, {"discrepancy", printed - quad}};
  }
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

struct ExperimentArgs {
  std::string name;
  std::string config;
  std::string out;
  std::string seed;
  std::string method;
  std::string noise;
  std::size_t trees = 0;
  std::size_t ntry = 0;
  std::size_t k = 0;
  unsigned workers = 0;
  std::vector<std::string> settings;
};

ExperimentConfig experiment_config(const ExperimentArgs& a) {
  try {
    auto cfg = a.config.empty() ? ExperimentConfig() : ExperimentConfig::load(a.config);
    if (!a.seed.empty()) cfg.set("experiment.seeds", a.seed);
    if (!a.method.empty()) cfg.set("experiment.methods", a.method);
    if (!a.noise.empty()) cfg.set("experiment.noise", a.noise);
    if (a.trees > 0) cfg.set("forest.trees", std::to_string(a.trees));
    if (a.ntry > 0) cfg.set("forest.ntry", std::to_string(a.ntry));
    if (a.k > 0) cfg.set("knn.k", std::to_string(a.k));
    if (a.workers > 0) cfg.set("experiment.workers", std::to_string(a.workers));
    for (const auto& kv : a.settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // Fail early on malformed values.
    cfg.seeds("experiment.seeds");
    cfg.counts("experiment.noise");
    cfg.count("experiment.workers");
    return cfg;
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

int run_experiment(const ExperimentArgs& a) {
  const auto cfg = experiment_config(a);
  if (a.name == "toy") {
    for (const auto& r : run_toy(cfg, a.out).seeds)
      std::cout << "seed " << r.seed << ": bayes " << r.bayes_error << ", knn " << r.knn_error << " (k=" << r.k_star
                << "), loclogit " << r.loclogit_error << ", rf " << r.rf_error << ", rf+lda " << r.rf_lda_error
                << ", oob " << r.oob_error << ", mean rho " << r.mean_rho << '\n';
  } else if (a.name == "noise") {
    for (const auto& c : run_noise(cfg, a.out).cells)
      std::cout << "seed " << c.seed << " noise " << c.noise << ": rf " << c.rf_error << ", knn " << c.knn_error
                << " (k=" << c.knn_k << ")\n";
  } else {
    const auto report = run_normal_laplace(cfg, a.out);
    for (const auto& mode : cfg.words("nl.modes"))
      for (auto n : cfg.counts("nl.sizes"))
        std::cout << mode << " n=" << n << ": median p_normal " << report.median(mode, n, 1) << " (normal), "
                  << report.median(mode, n, 2) << " (laplace)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABC model choice: reference tables, classifiers and experiments"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a reference table as CSV");
  simulate->add_option("--suite", sim.suite, "toy3 or normal-laplace")->capture_default_str();
  simulate->add_option("--summary", sim.summary, "normal-laplace summaries: mmv, mad or all")->capture_default_str();
  simulate->add_option("--n", sim.n, "Sample size per dataset")->capture_default_str();
  simulate->add_option("--rows", sim.rows, "Number of records")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Appended N(0,1) columns")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--workers", sim.workers)->capture_default_str();
  simulate->add_flag("--balanced", sim.balanced, "Equal records per model");
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

  ClassifyArgs cls;
  auto* classify = app.add_subcommand("classify", "Select a model for one observation");
  classify->add_option("--train", cls.train, "Reference table CSV")->required();
  auto* obs = classify->add_option("--obs", cls.obs, "CSV row of observed summaries");
  auto* data = classify->add_option("--dataset", cls.dataset, "Raw observed sample, summarized with --suite");
  obs->excludes(data);
  classify->add_option("--suite", cls.suite)->capture_default_str();
  classify->add_option("--summary", cls.summary)->capture_default_str();
  classify->add_option("--method", cls.method)->check(CLI::IsMember({"knn", "loclogit", "rf"}))->capture_default_str();
  classify->add_option("--k", cls.k, "Neighbors (0 calibrates on a holdout)")->capture_default_str();
  classify->add_option("--trees", cls.trees)->capture_default_str();
  classify->add_option("--ntry", cls.ntry, "Features tried per split (0 = default)")->capture_default_str();
  classify->add_option("--quantile", cls.quantile, "Local logit bandwidth quantile")->capture_default_str();
  classify->add_option("--seed", cls.seed)->capture_default_str();
  classify->add_option("--workers", cls.workers)->capture_default_str();
  classify->add_option("--out", cls.out, "Output JSON (default stdout)");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate-k", "Misclassification rate of k-NN over a grid of k");
  calibrate->add_option("--train", cal.train)->required();
  calibrate->add_option("--calib", cal.calib)->required();
  calibrate->add_option("--grid", cal.grid, "Comma-separated k values");
  calibrate->add_option("--workers", cal.workers)->capture_default_str();
  calibrate->add_option("--out", cal.out, "Output CSV (default stdout)");

  MarginalsArgs mar;
  auto* marginals = app.add_subcommand("marginals", "Exact and quadrature log marginals of the three-model suite");
  marginals->add_option("--dataset", mar.dataset, "Raw positive sample, one value per line or comma-separated")
      ->required();
  marginals->add_flag("--paper-verbatim", mar.verbatim,
                      "Also report the Log-Normal marginal as originally printed and its gap to quadrature");
  marginals->add_option("--out", mar.out, "Output JSON (default stdout)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run an experiment and write its CSVs");
  experiment->add_option("name", exp.name)->required()->check(CLI::IsMember({"toy", "noise", "normal-laplace"}));
  experiment->add_option("--config", exp.config, "INI file or manifest.json of an earlier run");
  experiment->add_option("--out", exp.out, "Output directory")->required();
  experiment->add_option("--seed", exp.seed, "Seed or comma-separated seeds");
  experiment->add_option("--method", exp.method, "Comma-separated subset of knn,loclogit,rf");
  experiment->add_option("--noise", exp.noise, "Comma-separated noise column counts");
  experiment->add_option("--trees", exp.trees);
  experiment->add_option("--ntry", exp.ntry);
  experiment->add_option("--k", exp.k);
  experiment->add_option("--workers", exp.workers);
  experiment->add_option("--set", exp.settings, "Override a configuration key: section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (classify->parsed()) {
      if (cls.obs.empty() && cls.dataset.empty()) throw UsageError("classify needs --obs or --dataset");
      return run_classify(cls);
    }
    if (calibrate->parsed()) return run_calibrate(cal);
    if (marginals->parsed()) return run_marginals(mar);
    return run_experiment(exp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kComputationError;
  }
}
