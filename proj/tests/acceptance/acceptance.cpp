// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "abcmc/config.hpp"
#include "abcmc/experiments.hpp"
#include "abcmc/models.hpp"
#include "abcmc/quadrature.hpp"

namespace fs = std::filesystem;
using namespace abcmc;

namespace {

// Criterion 1
constexpr double kOracleRelTol = 1e-6;
constexpr double kOracleAbsTol = 1e-8;
constexpr int kOracleDatasets = 100;
constexpr double kVerbatimGap = 10.0;
// Criterion 2
constexpr double kBayesTarget = 0.245;
constexpr double kBayesBand = 0.02;
// Criterion 3
constexpr std::size_t kKMin = 10;
constexpr std::size_t kKMax = 60;
constexpr double kKnnTarget = 0.277;
constexpr double kKnnBand = 0.02;
// Criterion 4
constexpr double kRfTarget = 0.276;
constexpr double kRfBand = 0.02;
constexpr double kLdaShift = 0.015;
// Criterion 5
const std::map<std::size_t, double> kRfNoiseMax{{10, 0.32}, {100, 0.43}, {1000, 0.48}};
const std::map<std::size_t, double> kKnnNoiseMin{{10, 0.45}, {100, 0.52}, {1000, 0.55}};
constexpr std::size_t kGapFromNoise = 4;
// Criterion 6
constexpr double kMmvLow = 0.4;
constexpr double kMmvHigh = 0.75;
constexpr double kMmvMedianGap = 0.25;
// Criterion 7
constexpr double kMadNormalMin = 0.9;
constexpr double kMadLaplaceMax = 0.1;
// Criterion 8
constexpr double kOobGap = 0.02;
constexpr std::size_t kOobSeeds = 3;
// Criterion 9
constexpr double kRhoCalibration = 0.03;

constexpr const char* kToySeeds = "1,2,3,4,5";
constexpr const char* kNoiseSeeds = "1,2,3";

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::map<int, Outcome> results;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void record(int id, bool pass, const std::string& detail, double seconds) {
  results[id] = {pass, detail, seconds};
  std::cout << "  [" << id << "] " << (pass ? "pass" : "FAIL") << ": " << detail << " (" << seconds << " s)"
            << std::endl;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_oracle() {
  Stopwatch clock;
  const SuiteThree suite;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0, verbatim_gap = 0.0;
  for (std::size_t n : {1u, 5u, 20u})
    for (int source = 1; source <= 3; ++source)
      for (int r = 0; r < kOracleDatasets; ++r) {
        auto rng = child_engine(child_seed(n, static_cast<std::uint64_t>(source)), static_cast<std::uint64_t>(r));
        const double theta = suite.draw_parameter(ModelIndex(source), rng);
        const auto y = suite.simulate(ModelIndex(source), theta, n, rng);
        for (int m = 1; m <= 3; ++m) {
          const double closed = log_marginal_three(ModelIndex(m), y).log_value;
          const double quad = quadrature_marginal(suite, ModelIndex(m), y).log_value;
          const double tol = kOracleRelTol * std::abs(closed) + kOracleAbsTol;
          worst = std::max(worst, std::abs(closed - quad) / tol);
          failed += std::abs(closed - quad) > tol;
          ++checked;
          if (m == 2 && n == 20) {
            const double printed = log_marginal_two_verbatim(summaries_three(y), n).log_value;
            verbatim_gap = std::max(verbatim_gap, std::abs(printed - quad));
          }
        }
      }
  const bool pass = failed == 0 && verbatim_gap > kVerbatimGap;
  record(1, pass,
         std::to_string(checked - failed) + "/" + std::to_string(checked) +
             " closed forms within tolerance (worst |diff|/tol " + fmt(worst) + "); largest printed-form gap " +
             fmt(verbatim_gap, 2) + " log-units",
         clock.seconds());
}

void criteria_toy(const fs::path& out) {
  Stopwatch clock;
  ExperimentConfig config;
  config.set("experiment.seeds", kToySeeds);
  const auto report = run_toy(config, out / "toy");
  const double elapsed = clock.seconds();
  std::vector<double> bayes, knn, rf, rf_lda;
  std::vector<std::size_t> ks;
  for (const auto& s : report.seeds) {
    bayes.push_back(s.bayes_error);
    knn.push_back(s.knn_error);
    rf.push_back(s.rf_error);
    rf_lda.push_back(s.rf_lda_error);
    ks.push_back(s.k_star);
    std::cout << "  toy seed " << s.seed << ": bayes " << s.bayes_error << ", k* " << s.k_star << ", knn "
              << s.knn_error << ", loclogit " << s.loclogit_error << " (bayes on same " << s.loclogit_bayes_error
              << ", failures " << s.loclogit_failures << "), rf " << s.rf_error << ", rf+lda " << s.rf_lda_error
              << ", oob " << s.oob_error << ", mean rho " << s.mean_rho << ", spearman " << s.rho_spearman
              << std::endl;
  }

  const double b = mean_of(bayes);
  record(2, std::abs(b - kBayesTarget) <= kBayesBand,
         "mean Bayes-optimal error " + fmt(b) + " (target " + fmt(kBayesTarget, 3) + " +/- " + fmt(kBayesBand, 2) + ")",
         elapsed);

  const double k_err = mean_of(knn);
  const bool k_ok = std::all_of(ks.begin(), ks.end(), [](std::size_t k) { return k >= kKMin && k <= kKMax; });
  std::string k_list;
  for (auto k : ks) k_list += (k_list.empty() ? "" : ",") + std::to_string(k);
  record(3, k_ok && std::abs(k_err - kKnnTarget) <= kKnnBand,
         "k* = {" + k_list + "} (band [" + std::to_string(kKMin) + "," + std::to_string(kKMax) +
             "]), mean k-NN error " + fmt(k_err) + " (target " + fmt(kKnnTarget, 3) + " +/- " + fmt(kKnnBand, 2) + ")",
         elapsed);

  const double r = mean_of(rf), rl = mean_of(rf_lda);
  record(4, std::abs(r - kRfTarget) <= kRfBand && std::abs(rl - r) <= kLdaShift,
         "mean RF error " + fmt(r) + " (target " + fmt(kRfTarget, 3) + " +/- " + fmt(kRfBand, 2) + "), with LDA " +
             fmt(rl) + " (shift " + fmt(rl - r) + ", limit " + fmt(kLdaShift, 3) + ")",
         elapsed);

  bool oob_ok = report.seeds.size() >= kOobSeeds;
  std::string oob_detail;
  for (std::size_t i = 0; i < std::min(kOobSeeds, report.seeds.size()); ++i) {
    const auto& s = report.seeds[i];
    const double gap = std::abs(s.oob_error - s.rf_error);
    oob_ok = oob_ok && gap <= kOobGap;
    oob_detail += (oob_detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(s.seed) + " |" +
                  fmt(s.oob_error) + " - " + fmt(s.rf_error) + "| = " + fmt(gap);
  }
  record(8, oob_ok, oob_detail + " (limit " + fmt(kOobGap, 2) + ")", elapsed);

  bool post_ok = true;
  std::string post_detail;
  for (const auto& s : report.seeds) {
    const double gap = std::abs(s.mean_rho - s.rf_error);
    post_ok = post_ok && s.posterior_in_range && gap <= kRhoCalibration && s.rho_spearman > 0.0;
    post_detail += (post_detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(s.seed) +
                   (s.posterior_in_range ? " in [0,1]" : " OUT OF RANGE") + ", |mean rho - error| " + fmt(gap) +
                   ", spearman " + fmt(s.rho_spearman, 3);
  }
  record(9, post_ok, post_detail + " (calibration limit " + fmt(kRhoCalibration, 2) + ")", elapsed);
}

void criterion_noise(const fs::path& out) {
  Stopwatch clock;
  ExperimentConfig config;
  config.set("experiment.seeds", kNoiseSeeds);
  config.set("experiment.methods", "knn,rf");
  const auto report = run_noise(config, out / "noise");
  std::map<std::size_t, std::vector<double>> rf, knn;
  bool gap_ok = true;
  std::string gap_detail;
  for (const auto& c : report.cells) {
    rf[c.noise].push_back(c.rf_error);
    knn[c.noise].push_back(c.knn_error);
    std::cout << "  noise seed " << c.seed << " count " << c.noise << ": rf " << c.rf_error << ", knn "
              << c.knn_error << " (k=" << c.knn_k << ")" << std::endl;
    if (c.noise >= kGapFromNoise && !(c.rf_error < c.knn_error)) {
      gap_ok = false;
      gap_detail += " seed " + std::to_string(c.seed) + "/noise " + std::to_string(c.noise);
    }
  }
  bool bands_ok = true;
  std::string detail;
  for (const auto& [count, limit] : kRfNoiseMax) {
    const double m = rf.count(count) ? mean_of(rf[count]) : 1.0;
    bands_ok = bands_ok && m <= limit;
    detail += "rf@" + std::to_string(count) + " " + fmt(m) + "<=" + fmt(limit, 2) + " ";
  }
  for (const auto& [count, limit] : kKnnNoiseMin) {
    const double m = knn.count(count) ? mean_of(knn[count]) : 0.0;
    bands_ok = bands_ok && m >= limit;
    detail += "knn@" + std::to_string(count) + " " + fmt(m) + ">=" + fmt(limit, 2) + " ";
  }
  detail += gap_ok ? "rf < knn for every noise count >= 4" : "rf >= knn at" + gap_detail;
  record(5, bands_ok && gap_ok, detail, clock.seconds());
}

void criteria_normal_laplace(const fs::path& out) {
  Stopwatch clock;
  ExperimentConfig config;
  config.set("suite.name", "normal-laplace");
  config.set("nl.sizes", "1000");
  const auto report = run_normal_laplace(config, out / "normal_laplace");
  const double elapsed = clock.seconds();
  const double mmv_n = report.median("mmv", 1000, 1), mmv_l = report.median("mmv", 1000, 2);
  record(6,
         mmv_n >= kMmvLow && mmv_n <= kMmvHigh && mmv_l >= kMmvLow && mmv_l <= kMmvHigh &&
             std::abs(mmv_n - mmv_l) < kMmvMedianGap,
         "mmv n=1000 median p_normal " + fmt(mmv_n, 3) + " (Normal), " + fmt(mmv_l, 3) + " (Laplace); band [" +
             fmt(kMmvLow, 2) + "," + fmt(kMmvHigh, 2) + "], gap limit " + fmt(kMmvMedianGap, 2),
         elapsed);
  const double mad_n = report.median("mad", 1000, 1), mad_l = report.median("mad", 1000, 2);
  record(7, mad_n >= kMadNormalMin && mad_l <= kMadLaplaceMax,
         "mad n=1000 median p_normal " + fmt(mad_n, 3) + " (Normal, >= " + fmt(kMadNormalMin, 2) + "), " +
             fmt(mad_l, 3) + " (Laplace, <= " + fmt(kMadLaplaceMax, 2) + ")",
         elapsed);
}

void criterion_determinism(const fs::path& out) {
  Stopwatch clock;
  using Runner = std::function<void(const ExperimentConfig&, const fs::path&)>;
  struct Case {
    std::string name;
    ExperimentConfig config;
    Runner run;
  };
  ExperimentConfig toy;
  toy.set("table.train", "3000");
  toy.set("table.calib", "500");
  toy.set("table.test", "500");
  toy.set("forest.trees", "60");
  toy.set("forest.error_trees", "60");
  toy.set("loclogit.queries", "40");
  toy.set("experiment.seeds", "7,8");
  ExperimentConfig noise = toy;
  noise.set("experiment.noise", "0,5,20");
  noise.set("experiment.methods", "knn,rf");
  ExperimentConfig nl;
  nl.set("suite.name", "normal-laplace");
  nl.set("nl.sizes", "10,100");
  nl.set("nl.replicates", "6");
  nl.set("nl.simulations", "2000");
  nl.set("nl.neighbors", "20");
  nl.set("experiment.seeds", "9");
  const std::vector<Case> cases{
      {"toy", toy, [](const auto& c, const auto& d) { run_toy(c, d); }},
      {"noise", noise, [](const auto& c, const auto& d) { run_noise(c, d); }},
      {"normal-laplace", nl, [](const auto& c, const auto& d) { run_normal_laplace(c, d); }},
  };
  bool pass = true;
  std::size_t compared = 0;
  std::string mismatches;
  for (const auto& c : cases) {
    const auto first = out / "determinism" / c.name / "original";
    fs::remove_all(first);
    c.run(c.config, first);
    for (const char* workers : {"1", "8"}) {
      auto again = ExperimentConfig::from_manifest(first / "manifest.json");
      again.set("experiment.workers", workers);
      const auto dir = out / "determinism" / c.name / (std::string("workers_") + workers);
      fs::remove_all(dir);
      c.run(again, dir);
      for (const auto& entry : fs::directory_iterator(first)) {
        if (entry.path().extension() != ".csv") continue;
        ++compared;
        if (slurp(entry.path()) != slurp(dir / entry.path().filename())) {
          pass = false;
          mismatches += " " + c.name + "/" + entry.path().filename().string() + "@" + workers;
        }
      }
    }
  }
  record(10, pass && compared > 0,
         std::to_string(compared) + " CSV reruns compared (workers 1 and 8)" +
             (mismatches.empty() ? ", all bit-identical" : ", mismatches:" + mismatches),
         clock.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_output";
  fs::create_directories(out);
  std::cout << "acceptance outputs in " << out << std::endl;
  const std::vector<std::pair<std::string, std::function<void()>>> stages{
      {"oracle", criterion_oracle},
      {"toy", [&] { criteria_toy(out); }},
      {"normal-laplace", [&] { criteria_normal_laplace(out); }},
      {"determinism", [&] { criterion_determinism(out); }},
      {"noise", [&] { criterion_noise(out); }},
  };
  for (const auto& [name, stage] : stages) {
    std::cout << "running " << name << std::endl;
    try {
      stage();
    } catch (const std::exception& e) {
      std::cout << "  " << name << " raised: " << e.what() << std::endl;
    }
  }
  bool all = true;
  std::cout << "\n";
  for (int id = 1; id <= 10; ++id) {
    const auto it = results.find(id);
    const bool pass = it != results.end() && it->second.pass;
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": "
              << (it != results.end() ? it->second.detail : std::string("not evaluated")) << std::endl;
  }
  return all ? 0 : 1;
}
