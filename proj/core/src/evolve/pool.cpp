#include <stdexcept>

#include <json.hpp>

#include "evolvegen/common/error.hpp"
#include "evolvegen/evolve/evolve.hpp"

namespace evolvegen::evolve {

using nlohmann::json;

double PoolRecord::qr() const {
  const double size = static_cast<double>(and_count + latch_count);
  const double t = measured_time_s.value_or(predicted_time_s);
  return size > 0 ? t / size : 0;
}

bool Pool::contains(const std::string& hash) const { return find(hash) != nullptr; }

const PoolRecord* Pool::find(const std::string& hash) const {
  for (const PoolRecord& r : records) {
    if (r.graph_hash == hash) return &r;
  }
  return nullptr;
}

void Pool::admit(PoolRecord r) {
  if (contains(r.graph_hash)) throw std::invalid_argument("duplicate graph hash " + r.graph_hash);
  records.push_back(std::move(r));
}

const PoolRecord& select_from_pool(const Pool& pool) {
  if (pool.empty()) throw EmptyPool("select_from_pool on an empty pool");
  const PoolRecord* best = &pool.records[0];
  for (const PoolRecord& r : pool.records) {
    if (r.predicted_time_s > best->predicted_time_s) best = &r;
  }
  return *best;
}

double average_pool_performance(const Pool& pool) {
  if (pool.empty()) throw EmptyPool("average of an empty pool");
  double s = 0;
  for (const PoolRecord& r : pool.records) s += r.predicted_time_s;
  return s / static_cast<double>(pool.size());
}

double mean_qr(const Pool& pool) {
  if (pool.empty()) return 0;
  double s = 0;
  for (const PoolRecord& r : pool.records) s += r.qr();
  return s / static_cast<double>(pool.size());
}

namespace {

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

std::string pool_to_json(const Pool& pool) {
  json j;
  j["format"] = "evolvegen-pool";
  j["version"] = 1;
  j["records"] = json::array();
  for (const PoolRecord& r : pool.records) {
    j["records"].push_back({
        {"graph_hash", r.graph_hash},
        {"predicted_time_s", r.predicted_time_s},
        {"measured_time_s", r.measured_time_s ? json(*r.measured_time_s) : json(nullptr)},
        {"and_count", r.and_count},
        {"latch_count", r.latch_count},
        {"qr", r.qr()},
        {"artifacts",
         {{"aiger", r.artifacts.aiger},
          {"btor2", r.artifacts.btor2},
          {"graph_json", r.artifacts.graph_json},
          {"features_json", r.artifacts.features_json}}},
        {"parent_hash", opt(r.parent_hash)},
        {"action_applied",
         r.action_applied ? json(std::string(graph::action_kind_name(*r.action_applied))) : json(nullptr)},
        {"graph", json::parse(graph::serialize(r.graph))},
    });
  }
  return j.dump(1);
}

Pool pool_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object() || j.value("format", "") != "evolvegen-pool") throw SchemaViolation("not a pool file");
  Pool pool;
  try {
    for (const json& jr : j.at("records")) {
      PoolRecord r;
      r.graph_hash = jr.at("graph_hash").get<std::string>();
      r.predicted_time_s = jr.at("predicted_time_s").get<double>();
      if (!jr.at("measured_time_s").is_null()) r.measured_time_s = jr["measured_time_s"].get<double>();
      r.and_count = jr.at("and_count").get<std::size_t>();
      r.latch_count = jr.at("latch_count").get<std::size_t>();
      const json& a = jr.at("artifacts");
      r.artifacts = {a.at("aiger").get<std::string>(), a.at("btor2").get<std::string>(),
                     a.at("graph_json").get<std::string>(), a.at("features_json").get<std::string>()};
      if (!jr.at("parent_hash").is_null()) r.parent_hash = jr["parent_hash"].get<std::string>();
      if (!jr.at("action_applied").is_null()) {
        r.action_applied = graph::parse_action_kind(jr["action_applied"].get<std::string>());
        if (!r.action_applied) throw SchemaViolation("unknown action " + jr["action_applied"].dump());
      }
      r.graph = graph::deserialize(jr.at("graph").dump());
      pool.admit(std::move(r));
    }
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("pool: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaViolation(std::string("pool: ") + e.what());
  }
  return pool;
}

std::string event_to_json(const AdmissionEvent& e) {
  json j = {
      {"iteration", e.iteration},
      {"phase", e.phase},
      {"strategy", std::string(strategy_name(e.strategy))},
      {"mutation_arm", e.mutation_arm ? json(std::string(graph::action_kind_name(*e.mutation_arm))) : json(nullptr)},
      {"parent_hash", opt(e.parent_hash)},
      {"action_seed", e.action_seed},
      {"length", e.length},
      {"candidate_hash", e.candidate_hash},
      {"status", e.success ? "success" : "failure"},
      {"failure_reason", e.failure_reason},
      {"reward", e.reward},
      {"baseline", e.baseline ? json(*e.baseline) : json(nullptr)},
      {"improved", e.improved},
      {"admitted", e.admitted},
      {"pool_size", e.pool_size},
  };
  return j.dump();
}

AdmissionEvent event_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (!j.is_object()) throw SchemaViolation("admission log line is not an object");
  AdmissionEvent e;
  try {
    e.iteration = j.at("iteration").get<std::uint64_t>();
    e.phase = j.at("phase").get<std::string>();
    const std::string s = j.at("strategy").get<std::string>();
    if (s != "mutate" && s != "generate") throw SchemaViolation("unknown strategy " + s);
    e.strategy = s == "mutate" ? Strategy::kMutate : Strategy::kGenerate;
    if (!j.at("mutation_arm").is_null()) {
      e.mutation_arm = graph::parse_action_kind(j["mutation_arm"].get<std::string>());
      if (!e.mutation_arm) throw SchemaViolation("unknown mutation arm");
    }
    if (!j.at("parent_hash").is_null()) e.parent_hash = j["parent_hash"].get<std::string>();
    e.action_seed = j.at("action_seed").get<std::uint64_t>();
    e.length = j.at("length").get<unsigned>();
    e.candidate_hash = j.at("candidate_hash").get<std::string>();
    e.success = j.at("status").get<std::string>() == "success";
    e.failure_reason = j.at("failure_reason").get<std::string>();
    e.reward = j.at("reward").get<double>();
    if (!j.at("baseline").is_null()) e.baseline = j["baseline"].get<double>();
    e.improved = j.at("improved").get<bool>();
    e.admitted = j.at("admitted").get<bool>();
    e.pool_size = j.at("pool_size").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw SchemaViolation(std::string("admission log: ") + ex.what());
  }
  return e;
}

}  // namespace evolvegen::evolve
