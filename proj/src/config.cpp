#include "abcmc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "abcmc/core.hpp"

namespace abcmc {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table{
      {"suite.name", "toy3"},
      {"suite.n", "20"},
      {"suite.summary", "mmv"},
      {"table.rows", "31000"},
      {"table.train", "29000"},
      {"table.calib", "1000"},
      {"table.test", "1000"},
      {"knn.k", "0"},
      {"knn.grid", "1,2,5,10,20,50,100,140,200,260,500,1000"},
      {"forest.trees", "500"},
      {"forest.ntry", "0"},
      {"forest.nboot", "0"},
      {"forest.min_node", "0"},
      {"forest.max_depth", "0"},
      {"forest.error_trees", "500"},
      {"loclogit.quantile", "0.01"},
      {"loclogit.ridge", "1e-6"},
      {"loclogit.queries", "200"},
      {"posterior.nw_quantile", "0.05"},
      {"posterior.nw_queries", "100"},
      {"experiment.methods", "knn,loclogit,rf"},
      {"experiment.seeds", "1"},
      {"experiment.noise", "0,2,4,6,8,10,20,50,100,200,1000"},
      {"experiment.lda", "true"},
      {"experiment.workers", "1"},
      {"nl.sizes", "10,100,1000"},
      {"nl.replicates", "100"},
      {"nl.simulations", "10000"},
      {"nl.neighbors", "100"},
      {"nl.modes", "mmv,mad"},
  };
  return table;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidArgument("config: '" + key + "' = '" + text + "' is not a valid number");
  return v;
}

ExperimentConfig from_ptree(const boost::property_tree::ptree& tree) {
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument("config: key '" + section + "' must belong to a [section]");
    for (const auto& [key, value] : body) cfg.set(section + "." + key, value.get_value<std::string>());
  }
  return cfg;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(defaults()) {}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("config: unknown key '" + key + "'");
  it->second = trim(value);
}

const std::string& ExperimentConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("config: unknown key '" + key + "'");
  return it->second;
}

std::int64_t ExperimentConfig::integer(const std::string& key) const {
  return parse_number<std::int64_t>(key, text(key));
}

std::size_t ExperimentConfig::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw InvalidArgument("config: '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

std::uint64_t ExperimentConfig::seed_value(const std::string& key) const {
  return parse_number<std::uint64_t>(key, text(key));
}

double ExperimentConfig::real(const std::string& key) const {
  const auto& t = text(key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size() || t.empty()) throw InvalidArgument("config: '" + key + "' = '" + t + "' is not a real number");
  return v;
}

bool ExperimentConfig::flag(const std::string& key) const {
  const auto& t = text(key);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidArgument("config: '" + key + "' = '" + t + "' is not a boolean");
}

std::vector<std::size_t> ExperimentConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text(key))) {
    const auto v = parse_number<std::int64_t>(key, item);
    if (v < 0) throw InvalidArgument("config: '" + key + "' entries must be nonnegative");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::seeds(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text(key))) out.push_back(parse_number<std::uint64_t>(key, item));
  if (out.empty()) throw InvalidArgument("config: '" + key + "' needs at least one seed");
  return out;
}

std::vector<std::string> ExperimentConfig::words(const std::string& key) const { return split_list(text(key)); }

ExperimentConfig ExperimentConfig::from_ini_text(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  return from_ptree(tree);
}

ExperimentConfig ExperimentConfig::from_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  // Boost's INI reader only knows ';' comments.
  std::string text, line;
  std::istringstream lines(ss.str());
  while (std::getline(lines, line)) {
    const auto t = trim(line);
    text += (t.starts_with('#') ? std::string{} : line) + '\n';
  }
  return from_ini_text(text);
}

ExperimentConfig ExperimentConfig::from_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("manifest: ") + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) throw InvalidArgument("manifest has no config object");
  ExperimentConfig cfg;
  for (const auto& [section, body] : j["config"].items()) {
    if (!body.is_object()) throw InvalidArgument("manifest: config section '" + section + "' is not an object");
    for (const auto& [key, value] : body.items()) {
      if (!value.is_string()) throw InvalidArgument("manifest: config values must be strings");
      cfg.set(section + "." + key, value.get<std::string>());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  if (path.extension() == ".json") return from_manifest(path);
  return from_ini(path);
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream out;
  std::string current;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const auto section = key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return j.dump(2);
}

}  // namespace abcmc
