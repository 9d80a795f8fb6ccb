#include "abcmc/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace abcmc {

ForestConfig resolve_config(ForestConfig c, ForestKind kind, std::size_t n_records, std::size_t dim) {
  const bool clf = kind == ForestKind::Classification;
  if (dim == 0) throw InvalidArgument("forest: no summary columns");
  if (n_records == 0) throw InvalidArgument("forest: empty table");
  if (c.n_try == 0) {
    const double d = static_cast<double>(dim);
    c.n_try = static_cast<std::size_t>(clf ? std::ceil(std::sqrt(d)) : std::ceil(d / 3.0));
  }
  if (c.n_boot == 0) c.n_boot = n_records;
  if (c.min_node == 0) c.min_node = clf ? 1 : 5;
  if (c.n_trees < 1) throw InvalidArgument("forest: n_trees must be at least 1");
  if (c.n_try < 1 || c.n_try > dim)
    throw InvalidArgument("forest: n_try=" + std::to_string(c.n_try) + " must lie in 1.." + std::to_string(dim));
  if (c.n_boot < 1 || c.n_boot > n_records)
    throw InvalidArgument("forest: n_boot=" + std::to_string(c.n_boot) + " must lie in 1.." + std::to_string(n_records));
  return c;
}

TrainingData TrainingData::classification(const ReferenceTable& table) {
  TrainingData data;
  data.x = table.stats();
  data.n_classes = table.n_models();
  data.labels.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) data.labels[i] = static_cast<int>(table.model(i).slot());
  data.compute_ranks();
  return data;
}

TrainingData TrainingData::regression(const ReferenceTable& table, const Eigen::Ref<const Eigen::VectorXd>& response) {
  if (static_cast<std::size_t>(response.size()) != table.size())
    throw InvalidArgument("regression forest: one response per record required");
  TrainingData data;
  data.x = table.stats();
  data.response = response;
  data.n_classes = table.n_models();
  data.compute_ranks();
  return data;
}

void TrainingData::compute_ranks() {
  const std::size_t N = size();
  ranks.assign(N * dim(), 0);
  std::vector<std::uint32_t> order(N);
  for (std::size_t f = 0; f < dim(); ++f) {
    const double* col = x.data() + static_cast<Eigen::Index>(f * N);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    std::uint32_t r = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (i > 0 && col[order[i]] != col[order[i - 1]]) ++r;
      ranks[f * N + order[i]] = r;
    }
  }
}

namespace {

// Scans candidate features of one node; buffers are reused across nodes.
class SplitFinder {
 public:
  SplitFinder(const TrainingData& data, ForestKind kind) : data_(data), kind_(kind) {
    if (data.ranks.size() == data.size() * data.dim()) {
      ranks_ = data.ranks.data();
    } else {
      TrainingData copy;
      copy.x = data.x;
      copy.compute_ranks();
      own_ranks_ = std::move(copy.ranks);
      ranks_ = own_ranks_.data();
    }
    while (rank_bits_ < 32 && (std::size_t{1} << rank_bits_) < data.size()) ++rank_bits_;
    if (kind_ == ForestKind::Classification) {
      totals_.resize(static_cast<std::size_t>(data.n_classes));
      left_.resize(static_cast<std::size_t>(data.n_classes));
    }
  }

  // Node summary used both for split search and for leaf values.
  struct NodeStats {
    double weight = 0.0;
    double impurity = 0.0;
    double base_score = 0.0;  // sum_c T_c^2 / W, or S^2 / W
    double sum = 0.0;         // regression: weighted response sum
    double sum_sq = 0.0;
  };

  NodeStats node_stats(std::span<const std::uint32_t> rows, std::span<const double> wts) {
    NodeStats st;
    if (kind_ == ForestKind::Classification) {
      std::fill(totals_.begin(), totals_.end(), 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i) totals_[static_cast<std::size_t>(data_.labels[rows[i]])] += wts[i];
      for (double t : totals_) {
        st.weight += t;
        st.base_score += t * t;
      }
      st.base_score /= st.weight;
      st.impurity = 1.0 - st.base_score / st.weight;
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = data_.response[rows[i]];
        st.weight += wts[i];
        st.sum += wts[i] * y;
        st.sum_sq += wts[i] * y * y;
      }
      st.base_score = st.sum * st.sum / st.weight;
      st.impurity = std::max(0.0, st.sum_sq / st.weight - (st.sum / st.weight) * (st.sum / st.weight));
    }
    return st;
  }

  // Majority slot (smallest on ties) from the totals of the last node_stats call.
  int majority() const {
    return static_cast<int>(std::max_element(totals_.begin(), totals_.end()) - totals_.begin());
  }

  std::optional<Split> find(std::span<const std::uint32_t> rows, std::span<const double> wts,
                            std::span<const std::size_t> features, const NodeStats& st) {
    if (rows.size() < 2 || !(st.impurity > 0.0)) return std::nullopt;
    const std::size_t n = rows.size();
    const std::size_t N = data_.size();
    double best_score = st.base_score;
    std::optional<Split> best;
    const double min_gain = 1e-12 * st.impurity * st.weight;
    const bool clf = kind_ == ForestKind::Classification;

    for (std::size_t f : features) {
      const double* col = data_.x.data() + static_cast<Eigen::Index>(f * N);
      sort_by_rank(ranks_ + f * N, rows);
      if (keys_.front() >> 32 == keys_.back() >> 32) continue;

      double w_left = 0.0;
      double s_left = 0.0;
      if (clf) std::fill(left_.begin(), left_.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto pos = static_cast<std::uint32_t>(keys_[i]);
        const double w = wts[pos];
        w_left += w;
        if (clf) {
          left_[static_cast<std::size_t>(data_.labels[rows[pos]])] += w;
        } else {
          s_left += w * data_.response[rows[pos]];
        }
        if (keys_[i] >> 32 == keys_[i + 1] >> 32) continue;
        const double w_right = st.weight - w_left;
        double score;
        if (clf) {
          double sl = 0.0, sr = 0.0;
          for (std::size_t c = 0; c < left_.size(); ++c) {
            const double l = left_[c];
            const double r = totals_[c] - l;
            sl += l * l;
            sr += r * r;
          }
          score = sl / w_left + sr / w_right;
        } else {
          const double s_right = st.sum - s_left;
          score = s_left * s_left / w_left + s_right * s_right / w_right;
        }
        if (score > best_score && score - st.base_score > min_gain) {
          best_score = score;
          const double lo = col[rows[pos]];
          const double hi = col[rows[static_cast<std::uint32_t>(keys_[i + 1])]];
          double t = lo + 0.5 * (hi - lo);
          if (!(t > lo)) t = hi;
          best = Split{f, t, (score - st.base_score) / st.weight};
        }
      }
    }
    return best;
  }

 private:
  // Fills keys_ with (rank << 32 | position) in ascending order; equal ranks keep position order.
  void sort_by_rank(const std::uint32_t* rank, std::span<const std::uint32_t> rows) {
    const std::size_t n = rows.size();
    keys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) keys_[i] = (std::uint64_t{rank[rows[i]]} << 32) | i;
    if (n < kRadixMin) {
      std::sort(keys_.begin(), keys_.end());
      return;
    }
    scratch_.resize(n);
    for (int shift = 32; shift < 32 + rank_bits_; shift += kDigitBits) {
      counts_.assign(kBuckets + 1, 0);
      for (auto k : keys_) ++counts_[((k >> shift) & (kBuckets - 1)) + 1];
      for (std::size_t b = 0; b < kBuckets; ++b) counts_[b + 1] += counts_[b];
      for (auto k : keys_) scratch_[counts_[(k >> shift) & (kBuckets - 1)]++] = k;
      keys_.swap(scratch_);
    }
  }

  static constexpr std::size_t kRadixMin = 256;
  static constexpr int kDigitBits = 11;
  static constexpr std::size_t kBuckets = std::size_t{1} << kDigitBits;

  const TrainingData& data_;
  ForestKind kind_;
  std::vector<std::uint32_t> own_ranks_;
  const std::uint32_t* ranks_ = nullptr;
  int rank_bits_ = 1;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint64_t> scratch_;
  std::vector<std::size_t> counts_;
  std::vector<double> totals_;
  std::vector<double> left_;
};

// Moves rows with x[feature] < threshold to the front; returns the boundary.
std::size_t partition_rows(const TrainingData& data, std::vector<std::uint32_t>& rows, std::vector<double>& wts,
                           std::size_t begin, std::size_t end, std::size_t feature, double threshold) {
  const double* col = data.x.data() + static_cast<Eigen::Index>(feature) * data.x.rows();
  std::size_t i = begin;
  std::size_t j = end;
  while (true) {
    while (i < j && col[rows[i]] < threshold) ++i;
    while (i < j && !(col[rows[j - 1]] < threshold)) --j;
    if (i >= j) return i;
    std::swap(rows[i], rows[j - 1]);
    std::swap(wts[i], wts[j - 1]);
    ++i;
    --j;
  }
}

}  // namespace

std::optional<Split> best_split(const TrainingData& data, ForestKind kind, std::span<const std::uint32_t> rows,
                                std::span<const double> weights, std::span<const std::size_t> candidate_features) {
  if (rows.size() != weights.size()) throw InvalidArgument("best_split: one weight per row required");
  for (auto f : candidate_features)
    if (f >= data.dim()) throw InvalidArgument("best_split: feature index out of range");
  std::vector<std::size_t> feats(candidate_features.begin(), candidate_features.end());
  std::sort(feats.begin(), feats.end());
  SplitFinder finder(data, kind);
  const auto st = finder.node_stats(rows, weights);
  return finder.find(rows, weights, feats, st);
}

std::size_t Tree::leaf_index(const double* s) const {
  std::size_t k = 0;
  while (!nodes[k].is_leaf()) {
    const auto& n = nodes[k];
    k = s[n.feature] < n.threshold ? n.left : n.left + 1;
  }
  return k;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> depth(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    deepest = std::max(deepest, depth[k]);
    if (!nodes[k].is_leaf()) {
      depth[nodes[k].left] = depth[k] + 1;
      depth[nodes[k].left + 1] = depth[k] + 1;
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree grow_tree(const TrainingData& data, ForestKind kind, std::span<const std::uint32_t> sample,
               const ForestConfig& cfg, Engine& rng) {
  if (sample.empty()) throw InvalidArgument("grow_tree: empty sample");
  const std::size_t N = data.size();
  const std::size_t d = data.dim();
  const bool clf = kind == ForestKind::Classification;

  std::vector<double> multiplicity(N, 0.0);
  for (auto idx : sample) {
    if (idx >= N) throw InvalidArgument("grow_tree: sample index out of range");
    multiplicity[idx] += 1.0;
  }
  std::vector<std::uint32_t> rows;
  std::vector<double> wts;
  for (std::size_t i = 0; i < N; ++i)
    if (multiplicity[i] > 0.0) {
      rows.push_back(static_cast<std::uint32_t>(i));
      wts.push_back(multiplicity[i]);
    }

  Tree tree;
  tree.importance = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  tree.nodes.emplace_back();
  const double root_weight = static_cast<double>(sample.size());

  struct Pending {
    std::uint32_t node;
    std::size_t begin, end, depth;
  };
  std::vector<Pending> stack{{0, 0, rows.size(), 0}};
  std::vector<std::size_t> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> candidates(cfg.n_try);
  SplitFinder finder(data, kind);

  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::span<const std::uint32_t> node_rows(rows.data() + p.begin, p.end - p.begin);
    const std::span<const double> node_wts(wts.data() + p.begin, p.end - p.begin);
    const auto st = finder.node_stats(node_rows, node_wts);

    std::optional<Split> split;
    const bool can_split = node_rows.size() >= 2 && st.weight > static_cast<double>(cfg.min_node) &&
                           (cfg.max_depth == 0 || p.depth < cfg.max_depth) && st.impurity > 0.0;
    if (can_split) {
      for (std::size_t k = 0; k < cfg.n_try; ++k) {
        const auto j = std::uniform_int_distribution<std::size_t>(k, d - 1)(rng);
        std::swap(pool[k], pool[j]);
      }
      std::copy(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.n_try), candidates.begin());
      std::sort(candidates.begin(), candidates.end());
      split = finder.find(node_rows, node_wts, candidates, st);
    }

    if (!split) {
      auto& leaf = tree.nodes[p.node];
      leaf.feature = -1;
      if (clf) {
        finder.node_stats(node_rows, node_wts);
        leaf.value = finder.majority();
      } else {
        leaf.value = st.sum / st.weight;
      }
      continue;
    }

    const std::size_t mid = partition_rows(data, rows, wts, p.begin, p.end, split->feature, split->threshold);
    const auto left = static_cast<std::uint32_t>(tree.nodes.size());
    {
      auto& node = tree.nodes[p.node];
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = split->threshold;
      node.value = split->impurity_decrease;
      node.left = left;
    }
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.importance[static_cast<Eigen::Index>(split->feature)] += st.weight / root_weight * split->impurity_decrease;
    stack.push_back({left + 1, mid, p.end, p.depth + 1});
    stack.push_back({left, p.begin, mid, p.depth + 1});
  }
  return tree;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd Forest::votes(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  if (static_cast<std::size_t>(s.size()) != dim)
    throw InvalidArgument("forest: query has dimension " + std::to_string(s.size()) + ", expected " +
                          std::to_string(dim));
  const Eigen::VectorXd q = s;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_models);
  for (const auto& t : trees) v[static_cast<Eigen::Index>(t.predict(q.data()))] += 1.0;
  return v;
}

ModelIndex Forest::predict_class(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  const Eigen::VectorXd v = votes(s);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return ModelIndex::from_slot(static_cast<std::size_t>(best));
}

double Forest::predict_value(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  if (static_cast<std::size_t>(s.size()) != dim)
    throw InvalidArgument("forest: query has dimension " + std::to_string(s.size()) + ", expected " +
                          std::to_string(dim));
  const Eigen::VectorXd q = s;
  double total = 0.0;
  for (const auto& t : trees) total += t.predict(q.data());
  return total / static_cast<double>(trees.size());
}

Forest grow_forest(const TrainingData& data, ForestKind kind, ForestConfig config) {
  const auto cfg = resolve_config(config, kind, data.size(), data.dim());
  if (kind == ForestKind::Classification && data.labels.size() != data.size())
    throw InvalidArgument("grow_forest: classification needs labels");
  if (kind == ForestKind::Regression && static_cast<std::size_t>(data.response.size()) != data.size())
    throw InvalidArgument("grow_forest: regression needs a response");
  Forest forest;
  forest.kind = kind;
  forest.config = cfg;
  forest.n_models = data.n_classes;
  forest.dim = data.dim();
  forest.n_records = data.size();
  forest.trees.resize(cfg.n_trees);
  forest.membership.resize(cfg.n_trees);

  const auto N = static_cast<std::uint32_t>(data.size());
  parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t b) {
    Engine rng = child_engine(cfg.seed, b);
    std::vector<std::uint32_t> sample(cfg.n_boot);
    if (cfg.replace) {
      std::uniform_int_distribution<std::uint32_t> pick(0, N - 1);
      for (auto& s : sample) s = pick(rng);
    } else {
      std::vector<std::uint32_t> perm(N);
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t k = 0; k < cfg.n_boot; ++k) {
        const auto j = std::uniform_int_distribution<std::size_t>(k, N - 1)(rng);
        std::swap(perm[k], perm[j]);
        sample[k] = perm[k];
      }
    }
    std::sort(sample.begin(), sample.end());
    forest.trees[b] = grow_tree(data, kind, sample, cfg, rng);
    forest.membership[b] = std::move(sample);
  });
  return forest;
}

Forest grow_forest(const ReferenceTable& table, ForestKind kind, ForestConfig config) {
  if (kind != ForestKind::Classification)
    throw InvalidArgument("grow_forest: use grow_regression_forest for a regression response");
  return grow_forest(TrainingData::classification(table), kind, config);
}

Forest grow_regression_forest(const ReferenceTable& table, const Eigen::Ref<const Eigen::VectorXd>& response,
                              ForestConfig config) {
  return grow_forest(TrainingData::regression(table, response), ForestKind::Regression, config);
}

std::vector<ModelIndex> predict_all(const Forest& forest, const ReferenceTable& queries, unsigned workers) {
  std::vector<ModelIndex> out(queries.size());
  parallel_for(queries.size(), workers,
               [&](std::size_t i) { out[i] = forest.predict_class(queries.stats_row(i).transpose()); });
  return out;
}

OobResult oob_predictions(const Forest& forest, const ReferenceTable& table) {
  if (forest.kind != ForestKind::Classification) throw InvalidArgument("oob: classification forest required");
  if (table.size() != forest.n_records || table.dim() != forest.dim)
    throw InvalidArgument("oob: table does not match the forest's training table");
  const std::size_t N = table.size();
  const auto M = static_cast<std::size_t>(forest.n_models);
  std::vector<std::uint32_t> votes(N * M, 0);
  std::vector<char> in_bag(N);
  for (std::size_t b = 0; b < forest.trees.size(); ++b) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto idx : forest.membership[b]) in_bag[idx] = 1;
    const auto& tree = forest.trees[b];
    for (std::size_t i = 0; i < N; ++i) {
      if (in_bag[i]) continue;
      const auto slot = static_cast<std::size_t>(tree.predict(table.stats_row(i).data()));
      ++votes[i * M + slot];
    }
  }
  OobResult result;
  result.predictions.resize(N);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto* v = votes.data() + i * M;
    if (std::accumulate(v, v + M, 0u) == 0) {
      result.skipped.push_back(i);
      continue;
    }
    const auto best = static_cast<std::size_t>(std::max_element(v, v + M) - v);
    result.predictions[i] = ModelIndex::from_slot(best);
    wrong += *result.predictions[i] != table.model(i);
  }
  const std::size_t counted = N - result.skipped.size();
  result.error_rate = counted > 0 ? static_cast<double>(wrong) / static_cast<double>(counted) : 0.0;
  return result;
}

double oob_error(const Forest& forest, const ReferenceTable& table) { return oob_predictions(forest, table).error_rate; }

Eigen::VectorXd variable_importance(const Forest& forest) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(forest.dim));
  for (const auto& t : forest.trees) total += t.importance;
  return total / static_cast<double>(forest.trees.size());
}

void write_importance_csv(const Eigen::Ref<const Eigen::VectorXd>& importance, const std::vector<std::string>& names,
                          std::ostream& out) {
  if (static_cast<std::size_t>(importance.size()) != names.size())
    throw InvalidArgument("importance: one name per feature required");
  out << "stat_name,importance\n";
  for (std::size_t j = 0; j < names.size(); ++j) out << names[j] << ',' << importance[static_cast<Eigen::Index>(j)] << '\n';
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kMagic = "abcmc-forest";
constexpr int kFormatVersion = 1;

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error("forest file: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) throw Error("forest file: expected '" + w + "', found '" + got + "'");
  }
  template <typename T>
  T number() {
    const auto w = word();
    T v{};
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw Error("forest file: bad number '" + w + "'");
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_forest(const Forest& forest, std::ostream& out) {
  const auto& c = forest.config;
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "kind " << (forest.kind == ForestKind::Classification ? "classification" : "regression") << '\n';
  out << "models " << forest.n_models << "\ndim " << forest.dim << "\nrecords " << forest.n_records << '\n';
  out << "config " << c.n_trees << ' ' << c.n_try << ' ' << c.n_boot << ' ' << c.min_node << ' ' << c.max_depth << ' '
      << (c.replace ? 1 : 0) << ' ' << c.seed << '\n';
  for (std::size_t b = 0; b < forest.trees.size(); ++b) {
    const auto& t = forest.trees[b];
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
      out << n.feature << ' ';
      put(out, n.threshold);
      out << ' ';
      put(out, n.value);
      out << ' ' << n.left << '\n';
    }
    out << "importance";
    for (double v : t.importance) {
      out << ' ';
      put(out, v);
    }
    out << "\nmembership " << forest.membership[b].size();
    for (auto idx : forest.membership[b]) out << ' ' << idx;
    out << '\n';
  }
  out << "end\n";
}

Forest load_forest(std::istream& in) {
  TokenReader r(in);
  r.expect(kMagic);
  if (r.number<int>() != kFormatVersion) throw Error("forest file: unsupported forest format version");
  Forest f;
  r.expect("kind");
  const auto kind = r.word();
  if (kind == "classification") f.kind = ForestKind::Classification;
  else if (kind == "regression") f.kind = ForestKind::Regression;
  else throw Error("forest file: unknown forest kind '" + kind + "'");
  r.expect("models");
  f.n_models = r.number<int>();
  r.expect("dim");
  f.dim = r.number<std::size_t>();
  r.expect("records");
  f.n_records = r.number<std::size_t>();
  r.expect("config");
  f.config.n_trees = r.number<std::size_t>();
  f.config.n_try = r.number<std::size_t>();
  f.config.n_boot = r.number<std::size_t>();
  f.config.min_node = r.number<std::size_t>();
  f.config.max_depth = r.number<std::size_t>();
  f.config.replace = r.number<int>() != 0;
  f.config.seed = r.number<std::uint64_t>();
  for (std::size_t b = 0; b < f.config.n_trees; ++b) {
    r.expect("tree");
    Tree t;
    t.nodes.resize(r.number<std::size_t>());
    for (auto& n : t.nodes) {
      n.feature = r.number<std::int32_t>();
      n.threshold = r.number<double>();
      n.value = r.number<double>();
      n.left = r.number<std::uint32_t>();
      if (!n.is_leaf() && (static_cast<std::size_t>(n.feature) >= f.dim || n.left + 1 >= t.nodes.size()))
        throw Error("forest file: corrupt tree node");
    }
    r.expect("importance");
    t.importance.resize(static_cast<Eigen::Index>(f.dim));
    for (auto& v : t.importance) v = r.number<double>();
    r.expect("membership");
    std::vector<std::uint32_t> members(r.number<std::size_t>());
    for (auto& m : members) m = r.number<std::uint32_t>();
    f.trees.push_back(std::move(t));
    f.membership.push_back(std::move(members));
  }
  r.expect("end");
  return f;
}

}  // namespace abcmc
