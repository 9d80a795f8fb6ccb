#include "abcmc/reftable.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "abcmc/rng.hpp"
#include "abcmc/stats.hpp"

namespace abcmc {

ReferenceTable::ReferenceTable(int n_models, std::vector<ModelIndex> models, RowMatrix params, RowMatrix stats,
                               std::vector<std::string> param_names, std::vector<std::string> stat_names,
                               std::string suite_id, std::uint64_t seed)
    : n_models_(n_models),
      models_(std::move(models)),
      params_(std::move(params)),
      stats_(std::move(stats)),
      param_names_(std::move(param_names)),
      stat_names_(std::move(stat_names)),
      suite_id_(std::move(suite_id)),
      seed_(seed) {
  const auto n = static_cast<Eigen::Index>(models_.size());
  if (n_models_ < 1) throw InvalidArgument("reference table needs at least one model");
  if (stats_.rows() != n || params_.rows() != n) throw InvalidArgument("reference table: row counts disagree");
  if (static_cast<std::size_t>(stats_.cols()) != stat_names_.size())
    throw InvalidArgument("reference table: stat names do not match the summary dimension");
  if (static_cast<std::size_t>(params_.cols()) != param_names_.size())
    throw InvalidArgument("reference table: param names do not match the parameter dimension");
  for (std::size_t i = 0; i < models_.size(); ++i)
    if (models_[i].value < 1 || models_[i].value > n_models_)
      throw InvalidArgument("reference table: record " + std::to_string(i) + " has model index " +
                            std::to_string(models_[i].value) + " outside 1.." + std::to_string(n_models_));
  if (!stats_.allFinite()) throw InvalidArgument("reference table: non-finite summary value");
}

ReferenceRecord ReferenceTable::record(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return {models_[i], params_.row(r).transpose(), stats_.row(r).transpose()};
}

std::vector<std::size_t> ReferenceTable::counts() const {
  std::vector<std::size_t> c(static_cast<std::size_t>(n_models_), 0);
  for (auto m : models_) ++c[m.slot()];
  return c;
}

ReferenceTable ReferenceTable::subset(const std::vector<std::size_t>& rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  std::vector<ModelIndex> models(rows.size());
  RowMatrix params(n, params_.cols());
  RowMatrix stats(n, stats_.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = rows[static_cast<std::size_t>(i)];
    if (src >= size()) throw InvalidArgument("subset: row index out of range");
    models[static_cast<std::size_t>(i)] = models_[src];
    params.row(i) = params_.row(static_cast<Eigen::Index>(src));
    stats.row(i) = stats_.row(static_cast<Eigen::Index>(src));
  }
  return ReferenceTable(n_models_, std::move(models), std::move(params), std::move(stats), param_names_, stat_names_,
                        suite_id_, seed_);
}

ReferenceTable ReferenceTable::select_columns(const std::vector<std::size_t>& cols) const {
  RowMatrix stats(stats_.rows(), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= dim()) throw InvalidArgument("select_columns: column index out of range");
    stats.col(static_cast<Eigen::Index>(j)) = stats_.col(static_cast<Eigen::Index>(cols[j]));
    names.push_back(stat_names_[cols[j]]);
  }
  return with_stats(std::move(stats), std::move(names));
}

ReferenceTable ReferenceTable::with_stats(RowMatrix stats, std::vector<std::string> stat_names) const {
  return ReferenceTable(n_models_, models_, params_, std::move(stats), param_names_, std::move(stat_names), suite_id_,
                        seed_);
}

bool operator==(const ReferenceTable& a, const ReferenceTable& b) {
  return a.n_models_ == b.n_models_ && a.models_ == b.models_ && a.params_.rows() == b.params_.rows() &&
         a.params_.cols() == b.params_.cols() && a.params_ == b.params_ && a.stats_.rows() == b.stats_.rows() &&
         a.stats_.cols() == b.stats_.cols() && a.stats_ == b.stats_ && a.param_names_ == b.param_names_ &&
         a.stat_names_ == b.stat_names_;
}

// ---------------------------------------------------------------------------

ReferenceTable build_reference_table(const ModelSuite& suite, std::size_t N, std::size_t n, std::uint64_t seed,
                                     const TableOptions& options) {
  const int M = suite.n_models();
  if (N < static_cast<std::size_t>(M))
    throw InvalidArgument("build_reference_table: N=" + std::to_string(N) + " is smaller than the number of models " +
                          std::to_string(M));
  if (n == 0) throw InvalidArgument("build_reference_table: sample size must be at least 1");
  std::vector<double> weights = options.prior_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(M), 1.0);
  if (weights.size() != static_cast<std::size_t>(M) ||
      std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }) ||
      std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0)
    throw InvalidArgument("build_reference_table: model prior needs M nonnegative weights with positive sum");
  const bool uniform = std::adjacent_find(weights.begin(), weights.end(), std::not_equal_to<>()) == weights.end();

  const auto param_names = suite.param_names();
  const auto stat_names = suite.stat_names();
  const auto rows = static_cast<Eigen::Index>(N);
  std::vector<ModelIndex> models(N);
  RowMatrix params(rows, static_cast<Eigen::Index>(param_names.size()));
  RowMatrix stats(rows, static_cast<Eigen::Index>(stat_names.size()));

  parallel_for(N, options.workers, [&](std::size_t i) {
    Engine rng = child_engine(seed, i);
    ModelIndex m;
    if (options.balanced) {
      m = ModelIndex::from_slot(i % static_cast<std::size_t>(M));
    } else if (uniform) {
      m = ModelIndex(std::uniform_int_distribution<int>(1, M)(rng));
    } else {
      m = ModelIndex::from_slot(
          static_cast<std::size_t>(std::discrete_distribution<int>(weights.begin(), weights.end())(rng)));
    }
    std::string last_error = "non-finite summary";
    for (int attempt = 0; attempt < options.max_retries; ++attempt) {
      const double theta = suite.draw_parameter(m, rng);
      Eigen::VectorXd s;
      try {
        s = suite.summarize(suite.simulate(m, theta, n, rng));
      } catch (const InvalidArgument& e) {
        last_error = e.what();
        continue;
      }
      if (!s.allFinite() || s.size() != stats.cols()) continue;
      models[i] = m;
      params(static_cast<Eigen::Index>(i), 0) = theta;
      stats.row(static_cast<Eigen::Index>(i)) = s.transpose();
      return;
    }
    throw Error("simulation of record " + std::to_string(i) + " (model " + std::to_string(m.value) + ") failed " +
                std::to_string(options.max_retries) + " times; last failure: " + last_error);
  });

  return ReferenceTable(M, std::move(models), std::move(params), std::move(stats), param_names, stat_names,
                        suite.id(), seed);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ScalingParams::apply(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  if (s.size() != center.size()) throw InvalidArgument("scaling: dimension mismatch");
  return (s - center).cwiseQuotient(scale);
}

Eigen::VectorXd ScalingParams::invert(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (z.size() != center.size()) throw InvalidArgument("scaling: dimension mismatch");
  return z.cwiseProduct(scale) + center;
}

RowMatrix ScalingParams::apply_rows(const RowMatrix& block) const {
  if (block.cols() != center.size()) throw InvalidArgument("scaling: dimension mismatch");
  RowMatrix out = (block.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
  return out;
}

ReferenceTable ScalingParams::apply(const ReferenceTable& table) const {
  return table.with_stats(apply_rows(table.stats()), table.stat_names());
}

Standardized standardize(const ReferenceTable& table) {
  const auto d = static_cast<Eigen::Index>(table.dim());
  ScalingParams sp{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto col = table.stats().col(j);
    sp.center[j] = median(col);
    sp.scale[j] = mad(col);
    if (!(sp.scale[j] > 0.0))
      throw InvalidArgument("standardize: column '" + table.stat_names()[static_cast<std::size_t>(j)] +
                            "' has zero median absolute deviation");
  }
  return {sp.apply(table), sp};
}

ReferenceTable augment_noise(const ReferenceTable& table, std::size_t count, std::uint64_t seed) {
  if (count == 0) return table;
  const auto n = static_cast<Eigen::Index>(table.size());
  const auto d = static_cast<Eigen::Index>(table.dim());
  RowMatrix stats(n, d + static_cast<Eigen::Index>(count));
  stats.leftCols(d) = table.stats();
  auto names = table.stat_names();
  for (std::size_t j = 0; j < count; ++j) {
    Engine rng = child_engine(seed, j);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto col = d + static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < n; ++i) stats(i, col) = normal(rng);
    names.push_back("noise_" + std::to_string(j + 1));
  }
  return table.with_stats(std::move(stats), std::move(names));
}

TableSplit split(const ReferenceTable& table, SplitSizes sizes, std::uint64_t seed) {
  const std::size_t wanted = sizes.train + sizes.calib + sizes.test;
  if (wanted > table.size())
    throw InvalidArgument("split: requested " + std::to_string(wanted) + " rows from a table of " +
                          std::to_string(table.size()));
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  Engine rng = child_engine(seed, 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto take = [&](std::size_t from, std::size_t count) {
    return table.subset(std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(from),
                                                 order.begin() + static_cast<std::ptrdiff_t>(from + count)));
  };
  return {take(0, sizes.train), take(sizes.train, sizes.calib), take(sizes.train + sizes.calib, sizes.test)};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view field, std::size_t line_no, std::size_t column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ParseError(line_no, "column " + std::to_string(column + 1) + ": '" + std::string(field) +
                                  "' is not a finite number");
  return v;
}

}  // namespace

void write_csv(const ReferenceTable& table, std::ostream& out) {
  out << "model";
  for (const auto& p : table.param_names()) out << ",param_" << p;
  for (const auto& s : table.stat_names()) out << ",stat_" << s;
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.model(i).value;
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < table.params().cols(); ++j) {
      out << ',';
      put_number(out, table.params()(r, j));
    }
    for (Eigen::Index j = 0; j < table.stats().cols(); ++j) {
      out << ',';
      put_number(out, table.stats()(r, j));
    }
    out << '\n';
  }
}

void save_csv(const ReferenceTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(table, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ReferenceTable read_csv(std::istream& in, int n_models) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "model") throw ParseError(1, "header must start with 'model'");
  std::vector<std::string> param_names, stat_names;
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto h = header[j];
    if (h.starts_with("param_") && h.size() > 6) {
      if (!stat_names.empty()) throw ParseError(1, "param_ columns must precede stat_ columns");
      param_names.emplace_back(h.substr(6));
    } else if (h.starts_with("stat_") && h.size() > 5) {
      stat_names.emplace_back(h.substr(5));
    } else {
      throw ParseError(1, "unexpected column name '" + std::string(h) + "'");
    }
  }
  if (stat_names.empty()) throw ParseError(1, "header has no stat_ columns");

  const std::size_t width = header.size();
  std::vector<ModelIndex> models;
  std::vector<double> values;
  int max_model = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width)
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    int m = 0;
    const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), m);
    if (res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size() || m < 1)
      throw ParseError(line_no, "model index '" + std::string(fields[0]) + "' is not a positive integer");
    if (n_models > 0 && m > n_models)
      throw ParseError(line_no, "model index " + std::to_string(m) + " exceeds " + std::to_string(n_models));
    max_model = std::max(max_model, m);
    models.emplace_back(m);
    for (std::size_t j = 1; j < width; ++j) values.push_back(parse_double(fields[j], line_no, j));
  }
  const auto n = static_cast<Eigen::Index>(models.size());
  const auto p = static_cast<Eigen::Index>(param_names.size());
  const auto d = static_cast<Eigen::Index>(stat_names.size());
  RowMatrix params(n, p), stats(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = values.data() + i * (p + d);
    for (Eigen::Index j = 0; j < p; ++j) params(i, j) = row[j];
    for (Eigen::Index j = 0; j < d; ++j) stats(i, j) = row[p + j];
  }
  return ReferenceTable(n_models > 0 ? n_models : std::max(max_model, 1), std::move(models), std::move(params),
                        std::move(stats), std::move(param_names), std::move(stat_names), "csv", 0);
}

ReferenceTable load_csv(const std::filesystem::path& path, int n_models) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_csv(in, n_models);
}

}  // namespace abcmc
