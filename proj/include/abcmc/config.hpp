#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace abcmc {

/// Experiment settings addressed as "section.key". Every key has a default;
/// unknown keys are rejected. Values are kept as text so that echoing a
/// configuration and reading it back reproduces it exactly.
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// INI-style file: `[section]` headers and `key = value` lines; `;` or `#` start comments.
  static ExperimentConfig from_ini(const std::filesystem::path& path);
  static ExperimentConfig from_ini_text(const std::string& text);
  /// The "config" object of a manifest.json written by an experiment.
  static ExperimentConfig from_manifest(const std::filesystem::path& path);
  /// Dispatches on extension: .json is a manifest, anything else INI.
  static ExperimentConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  const std::string& text(const std::string& key) const;

  std::string str(const std::string& key) const { return text(key); }
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed_value(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  std::vector<std::uint64_t> seeds(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  std::string to_ini() const;
  /// Nested {section: {key: value}} JSON text.
  std::string to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace abcmc
