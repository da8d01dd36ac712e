#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/evolve/evolve.hpp"
#include "evolvegen/predictor/predictor.hpp"

namespace evolvegen::cli {

// One JSON document. Precedence: defaults, config file, EVOLVEGEN_* variables,
// command-line flags. Keys are dotted paths ("generation.max_width"); the
// variable for a key is EVOLVEGEN_ plus the path upper-cased with dots and
// dashes turned into underscores.
class RunConfig {
 public:
  RunConfig();

  // Throws ConfigError on unknown keys or mistyped values.
  void merge_file(const std::string& path);
  void merge_json(const nlohmann::json& doc);
  void merge_env(char** envp);
  void set(const std::string& key, const std::string& value);

  const nlohmann::json& get(const std::string& key) const;
  double real(const std::string& key) const { return get(key).get<double>(); }
  std::uint64_t uint(const std::string& key) const { return get(key).get<std::uint64_t>(); }
  std::string str(const std::string& key) const { return get(key).get<std::string>(); }

  evolve::EvolveConfig evolve_config() const;
  graph::GenerationConfig generation() const;
  // Throws ConfigError for unknown names.
  checker::ExternalAdapter adapter(const std::string& name) const;
  const std::vector<checker::ExternalAdapter>& adapters() const { return adapters_; }
  nlohmann::json to_json() const;

 private:
  std::map<std::string, nlohmann::json> values_;
  std::vector<checker::ExternalAdapter> adapters_;
};

}  // namespace evolvegen::cli
