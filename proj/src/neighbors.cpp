#include "abcmc/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "abcmc/rng.hpp"
#include "abcmc/stats.hpp"

namespace abcmc {

namespace {

struct Neighbor {
  double dist2;
  std::size_t index;
  bool operator<(const Neighbor& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
};

void check_dim(const ReferenceTable& train, Eigen::Index size) {
  if (static_cast<std::size_t>(size) != train.dim())
    throw InvalidArgument("query has dimension " + std::to_string(size) + " but the table has " +
                          std::to_string(train.dim()));
}

Eigen::VectorXd squared_distances(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s) {
  check_dim(train, s.size());
  return (train.stats().rowwise() - s.transpose()).rowwise().squaredNorm();
}

std::vector<Neighbor> ordered_neighbors(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s,
                                        std::size_t k) {
  if (k < 1 || k > train.size())
    throw InvalidArgument("k=" + std::to_string(k) + " must lie in 1.." + std::to_string(train.size()));
  const Eigen::VectorXd d2 = squared_distances(train, s);
  std::vector<Neighbor> all(train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = {d2[static_cast<Eigen::Index>(i)], i};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

}  // namespace

Kernel parse_kernel(const std::string& name) {
  if (name == "uniform") return Kernel::Uniform;
  if (name == "epanechnikov") return Kernel::Epanechnikov;
  if (name == "gaussian") return Kernel::Gaussian;
  throw InvalidArgument("unknown kernel '" + name + "'");
}

double kernel_value(Kernel kernel, double u) {
  switch (kernel) {
    case Kernel::Uniform: return u <= 1.0 ? 1.0 : 0.0;
    case Kernel::Epanechnikov: return u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    default: return std::exp(-0.5 * u * u);
  }
}

Eigen::VectorXd distances(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s) {
  return squared_distances(train, s).cwiseSqrt();
}

std::vector<std::size_t> nearest(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s,
                                 std::size_t k) {
  const auto nb = ordered_neighbors(train, s, k);
  std::vector<std::size_t> ids(nb.size());
  std::transform(nb.begin(), nb.end(), ids.begin(), [](const Neighbor& n) { return n.index; });
  return ids;
}

ModelIndex argmax_model(const Eigen::Ref<const Eigen::VectorXd>& probs) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return ModelIndex::from_slot(static_cast<std::size_t>(best));
}

KnnResult knn_classify(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, std::size_t k) {
  KnnResult result;
  result.neighbor_ids = nearest(train, s, k);
  result.freqs = Eigen::VectorXd::Zero(train.n_models());
  for (auto id : result.neighbor_ids) result.freqs[static_cast<Eigen::Index>(train.model(id).slot())] += 1.0;
  result.freqs /= static_cast<double>(k);
  result.map = argmax_model(result.freqs);
  return result;
}

Eigen::VectorXd nadaraya_watson(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, Kernel kernel,
                                double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("nadaraya_watson: bandwidth must be positive");
  const Eigen::VectorXd d = distances(train, s);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(train.n_models());
  for (std::size_t i = 0; i < train.size(); ++i)
    p[static_cast<Eigen::Index>(train.model(i).slot())] +=
        kernel_value(kernel, d[static_cast<Eigen::Index>(i)] / bandwidth);
  const double total = p.sum();
  if (!(total > 0.0))
    throw InvalidArgument("nadaraya_watson: all kernel weights are zero; use a larger bandwidth");
  return p / total;
}

double distance_quantile(const ReferenceTable& train, const Eigen::Ref<const Eigen::VectorXd>& s, double q) {
  const Eigen::VectorXd d = distances(train, s);
  return order_quantile(std::vector<double>(d.begin(), d.end()), q);
}

std::vector<std::size_t> default_k_grid(std::size_t n_train) {
  std::vector<std::size_t> grid;
  for (std::size_t k : {1, 2, 5, 10, 20, 50, 100, 140, 200, 260, 500, 1000})
    if (k <= n_train) grid.push_back(k);
  return grid;
}

CalibrationCurve calibrate_k(const ReferenceTable& train, const ReferenceTable& calib, std::vector<std::size_t> grid,
                             unsigned workers) {
  if (grid.empty()) throw InvalidArgument("calibrate_k: empty grid");
  if (calib.size() == 0) throw InvalidArgument("calibrate_k: empty calibration table");
  for (auto k : grid)
    if (k < 1 || k > train.size()) throw InvalidArgument("calibrate_k: grid value " + std::to_string(k) + " out of range");
  const std::size_t k_max = *std::max_element(grid.begin(), grid.end());
  const std::size_t M = static_cast<std::size_t>(train.n_models());

  // wrong[q * G + g]: calibration record q misclassified at grid[g].
  std::vector<char> wrong(calib.size() * grid.size(), 0);
  parallel_for(calib.size(), workers, [&](std::size_t q) {
    const Eigen::VectorXd s = calib.stats_row(q).transpose();
    const auto nb = ordered_neighbors(train, s, k_max);
    std::vector<std::size_t> counts(M, 0);
    std::size_t taken = 0;
    // Visit grid values in increasing k order, extending the vote tally.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
    for (auto g : order) {
      while (taken < grid[g]) ++counts[train.model(nb[taken++].index).slot()];
      const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      wrong[q * grid.size() + g] = ModelIndex::from_slot(best) != calib.model(q);
    }
  });

  CalibrationCurve curve;
  curve.grid = grid;
  curve.errors.assign(grid.size(), 0.0);
  for (std::size_t q = 0; q < calib.size(); ++q)
    for (std::size_t g = 0; g < grid.size(); ++g) curve.errors[g] += wrong[q * grid.size() + g];
  for (auto& e : curve.errors) e /= static_cast<double>(calib.size());
  const auto best = std::min_element(curve.errors.begin(), curve.errors.end()) - curve.errors.begin();
  curve.k_star = grid[static_cast<std::size_t>(best)];
  return curve;
}

void write_calibration_csv(const CalibrationCurve& curve, std::ostream& out) {
  out << "k,error\n";
  for (std::size_t g = 0; g < curve.grid.size(); ++g) out << curve.grid[g] << ',' << curve.errors[g] << '\n';
}

double prior_error_rate(const std::vector<ModelIndex>& predictions, const ReferenceTable& test) {
  if (test.size() == 0) throw InvalidArgument("prior_error_rate: empty test table");
  if (predictions.size() != test.size()) throw InvalidArgument("prior_error_rate: prediction count mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) wrong += predictions[i] != test.model(i);
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double prior_error_rate(const Classifier& classifier, const ReferenceTable& test, unsigned workers) {
  if (test.size() == 0) throw InvalidArgument("prior_error_rate: empty test table");
  std::vector<ModelIndex> predictions(test.size());
  parallel_for(test.size(), workers,
               [&](std::size_t i) { predictions[i] = classifier(test.stats_row(i).transpose()); });
  return prior_error_rate(predictions, test);
}

std::vector<ModelIndex> knn_predict_all(const ReferenceTable& train, const ReferenceTable& queries, std::size_t k,
                                        unsigned workers) {
  std::vector<ModelIndex> out(queries.size());
  parallel_for(queries.size(), workers,
               [&](std::size_t i) { out[i] = knn_classify(train, queries.stats_row(i).transpose(), k).map; });
  return out;
}

}  // namespace abcmc
