#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "evolvegen/common/error.hpp"

namespace evolvegen::cli {

using nlohmann::json;

namespace {

enum class Kind { kUint, kReal, kString };

struct Key {
  const char* path;
  Kind kind;
  json fallback;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"seed", Kind::kUint, 1},
      {"workers", Kind::kUint, 1},
      {"max_pool", Kind::kUint, 60},
      {"init_pool", Kind::kUint, 10},
      {"action_cap", Kind::kUint, 40},
      {"init_max_length", Kind::kUint, 8},
      {"max_iterations", Kind::kUint, 2000},
      {"checker", Kind::kString, "internal"},
      {"frames", Kind::kUint, 5},
      {"dynamic_budget_s", Kind::kReal, 10.0},
      {"dynamic_budget_propagations", Kind::kUint, 5'000'000},
      {"node_budget", Kind::kUint, 20000},
      {"timeout_s", Kind::kReal, 60.0},
      {"recheck_timeout_s", Kind::kReal, 3600.0},
      {"max_label_s", Kind::kReal, 120.0},
      {"model", Kind::kString, ""},
      {"out", Kind::kString, ""},
      {"log_level", Kind::kString, "warn"},
      {"prior.alpha", Kind::kReal, 1.0},
      {"prior.beta", Kind::kReal, 1.0},
      {"generation.min_inputs", Kind::kUint, 1},
      {"generation.max_inputs", Kind::kUint, 3},
      {"generation.min_width", Kind::kUint, 1},
      {"generation.max_width", Kind::kUint, 16},
      {"generation.max_trip", Kind::kUint, 8},
      {"generation.max_loop_depth", Kind::kUint, 3},
      {"generation.const_operand_prob", Kind::kReal, 0.15},
      {"generation.fixed_prob", Kind::kReal, 0.25},
      {"generation.weight_op", Kind::kReal, 4.0},
      {"generation.weight_loop", Kind::kReal, 1.0},
      {"generation.weight_branch", Kind::kReal, 1.0},
      {"generation.weight_dep", Kind::kReal, 1.0},
  };
  return k;
}

const Key* find_key(const std::string& path) {
  for (const Key& k : keys()) {
    if (path == k.path) return &k;
  }
  return nullptr;
}

json coerce(const Key& k, const json& v) {
  switch (k.kind) {
    case Kind::kUint:
      if (v.is_number_unsigned()) return v;
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
      break;
    case Kind::kReal:
      if (v.is_number()) return v.get<double>();
      break;
    case Kind::kString:
      if (v.is_string()) return v;
      break;
  }
  throw ConfigError(std::string("bad value for ") + k.path + ": " + v.dump());
}

json parse_scalar(const Key& k, const std::string& text) {
  if (k.kind == Kind::kString) return text;
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) throw ConfigError(std::string("bad value for ") + k.path + ": " + text);
  return coerce(k, v);
}

std::string env_name(const std::string& path) {
  std::string s = "EVOLVEGEN_";
  for (char c : path) s += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

checker::ExternalAdapter adapter_from_json(const json& j) {
  static const std::vector<std::string> allowed = {"name", "command", "format", "grammar", "safe_exit", "unsafe_exit"};
  if (!j.is_object()) throw ConfigError("adapter entries must be objects");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw ConfigError("unknown adapter key " + k);
  }
  checker::ExternalAdapter a;
  try {
    a.name = j.at("name").get<std::string>();
    a.command_template = j.at("command").get<std::string>();
    a.format = j.value("format", std::string("aiger"));
    a.grammar = checker::parse_grammar(j.value("grammar", std::string("certificate-line")));
    a.safe_exit = j.value("safe_exit", 20);
    a.unsafe_exit = j.value("unsafe_exit", 10);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("adapter: ") + e.what());
  }
  if (a.name.empty() || a.name == "internal" || a.name == "bmc") throw ConfigError("reserved adapter name " + a.name);
  if (a.format != "aiger" && a.format != "btor2") throw ConfigError("adapter format must be aiger or btor2");
  return a;
}

void flatten(const json& doc, const std::string& prefix, std::map<std::string, json>& out,
             std::vector<checker::ExternalAdapter>& adapters) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (path == "adapters") {
      if (!v.is_array()) throw ConfigError("adapters must be an array");
      adapters.clear();
      for (const json& a : v) adapters.push_back(adapter_from_json(a));
      continue;
    }
    if (v.is_object()) {
      flatten(v, path, out, adapters);
      continue;
    }
    const Key* key = find_key(path);
    if (!key) throw ConfigError("unknown config key " + path);
    out[path] = coerce(*key, v);
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const Key& k : keys()) values_[k.path] = k.fallback;
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config " + path + " is not valid JSON");
  merge_json(doc);
}

void RunConfig::merge_json(const json& doc) { flatten(doc, "", values_, adapters_); }

void RunConfig::merge_env(char** envp) {
  if (!envp) return;
  for (char** e = envp; *e; ++e) {
    std::string entry = *e;
    if (entry.rfind("EVOLVEGEN_", 0) != 0) continue;
    const auto eq = entry.find('=');
    const std::string name = entry.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : entry.substr(eq + 1);
    const Key* key = nullptr;
    for (const Key& k : keys()) {
      if (env_name(k.path) == name) key = &k;
    }
    if (!key) throw ConfigError("unknown environment override " + name);
    values_[key->path] = parse_scalar(*key, value);
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key " + key);
  values_[key] = parse_scalar(*k, value);
}

const json& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key " + key);
  return it->second;
}

graph::GenerationConfig RunConfig::generation() const {
  graph::GenerationConfig g;
  g.min_inputs = static_cast<unsigned>(uint("generation.min_inputs"));
  g.max_inputs = static_cast<unsigned>(uint("generation.max_inputs"));
  g.min_width = static_cast<unsigned>(uint("generation.min_width"));
  g.max_width = static_cast<unsigned>(uint("generation.max_width"));
  g.max_trip = static_cast<std::int64_t>(uint("generation.max_trip"));
  g.max_loop_depth = static_cast<unsigned>(uint("generation.max_loop_depth"));
  g.const_operand_prob = real("generation.const_operand_prob");
  g.fixed_prob = real("generation.fixed_prob");
  g.weight_op = real("generation.weight_op");
  g.weight_loop = real("generation.weight_loop");
  g.weight_branch = real("generation.weight_branch");
  g.weight_dep = real("generation.weight_dep");
  if (g.min_inputs == 0 || g.min_inputs > g.max_inputs) throw ConfigError("generation input range is empty");
  if (g.min_width == 0 || g.min_width > g.max_width || g.max_width > 64) {
    throw ConfigError("generation width range must lie in [1, 64]");
  }
  if (g.max_trip == 0) throw ConfigError("generation.max_trip must be positive");
  return g;
}

evolve::EvolveConfig RunConfig::evolve_config() const {
  evolve::EvolveConfig c;
  c.seed = uint("seed");
  c.workers = static_cast<unsigned>(uint("workers"));
  c.max_pool = uint("max_pool");
  c.init_pool = uint("init_pool");
  c.action_cap = static_cast<unsigned>(uint("action_cap"));
  c.init_max_length = static_cast<unsigned>(uint("init_max_length"));
  c.max_iterations = uint("max_iterations");
  c.checker = str("checker");
  c.frames = static_cast<unsigned>(uint("frames"));
  c.dynamic_budget_s = real("dynamic_budget_s");
  c.node_budget = uint("node_budget");
  c.alpha0 = real("prior.alpha");
  c.beta0 = real("prior.beta");
  c.generation = generation();
  c.run_dir = str("out");
  c.validate();
  return c;
}

checker::ExternalAdapter RunConfig::adapter(const std::string& name) const {
  for (const auto& a : adapters_) {
    if (a.name == name) return a;
  }
  throw ConfigError("no adapter named " + name);
}

json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [path, v] : values_) {
    json* cur = &j;
    std::string rest = path;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      cur = &(*cur)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*cur)[rest] = v;
  }
  j["adapters"] = json::array();
  for (const auto& a : adapters_) {
    j["adapters"].push_back({{"name", a.name},
                             {"command", a.command_template},
                             {"format", a.format},
                             {"grammar", checker::grammar_name(a.grammar)},
                             {"safe_exit", a.safe_exit},
                             {"unsafe_exit", a.unsafe_exit}});
  }
  return j;
}

}  // namespace evolvegen::cli
