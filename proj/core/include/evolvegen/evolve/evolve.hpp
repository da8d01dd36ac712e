#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/common/rng.hpp"
#include "evolvegen/compile/ts.hpp"
#include "evolvegen/graph/graph.hpp"
#include "evolvegen/netlist/aig.hpp"
#include "evolvegen/predictor/predictor.hpp"

namespace evolvegen::evolve {

struct BetaArm {
  double alpha = 1;
  double beta = 1;
  std::uint64_t pulls = 0;
  double mean() const { return alpha / (alpha + beta); }
  bool operator==(const BetaArm&) const = default;
};

struct BanditAgent {
  std::vector<std::string> labels;
  std::vector<BetaArm> arms;

  static BanditAgent make(std::vector<std::string> labels, double alpha0 = 1, double beta0 = 1);
  bool operator==(const BanditAgent&) const = default;
};

// One Beta draw per arm; argmax, lowest index on ties.
std::size_t thompson_select(const BanditAgent& agent, Rng& rng);
// Same draws, argmax over arms with allowed[i]; arm 0 when none is allowed.
std::size_t thompson_select(const BanditAgent& agent, Rng& rng, const std::vector<bool>& allowed);
void agent_update(BanditAgent& agent, std::size_t arm, bool improved);

// Switch agent arm order.
enum class Strategy : std::uint8_t { kMutate = 0, kGenerate = 1 };
std::string_view strategy_name(Strategy s);

// Mutation agent arm order.
inline constexpr graph::ActionKind kMutationArms[] = {graph::ActionKind::kAddOp, graph::ActionKind::kAddBranch,
                                                      graph::ActionKind::kAddLoop, graph::ActionKind::kAddDep};

struct ArtifactPaths {
  std::string aiger, btor2, graph_json, features_json;
  bool operator==(const ArtifactPaths&) const = default;
};

struct PoolRecord {
  graph::ComputationGraph graph;
  std::string graph_hash;
  double predicted_time_s = 0;
  std::optional<double> measured_time_s;
  std::size_t and_count = 0;
  std::size_t latch_count = 0;
  ArtifactPaths artifacts;
  std::optional<std::string> parent_hash;
  std::optional<graph::ActionKind> action_applied;

  // Time over and+latch; measured time when present.
  double qr() const;
  bool operator==(const PoolRecord&) const = default;
};

struct Pool {
  std::vector<PoolRecord> records;  // admission order

  bool contains(const std::string& hash) const;
  const PoolRecord* find(const std::string& hash) const;
  void admit(PoolRecord r);  // throws std::invalid_argument on a duplicate hash
  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Maximal predicted time, earliest admission on ties. Throws EmptyPool.
const PoolRecord& select_from_pool(const Pool& pool);
// Mean predicted time. Throws EmptyPool.
double average_pool_performance(const Pool& pool);

// Basic and Optimized schedules of one graph, their miter and its AIG.
struct Problem {
  std::string hash;
  ts::TransitionSystem miter;
  netlist::AigCircuit aig;
};

// Throws ResourceBound and the scheduler's other errors.
Problem build_problem(const graph::ComputationGraph& g, std::size_t node_budget);

struct CorpusStats {
  std::size_t generated = 0;
  std::size_t written = 0;  // distinct problems on disk
  std::vector<std::string> failures;
};

// `count` fresh graphs with lengths drawn from [1, max_length], each written
// as <dir>/<hash>/{graph.json, a.aig, a.btor2}.
CorpusStats write_random_corpus(const std::string& dir, std::uint64_t seed, std::size_t count, unsigned max_length,
                                const graph::GenerationConfig& gen, std::size_t node_budget);

struct Evaluation {
  bool success = false;
  std::string failure_reason;  // error code name or "Duplicate"
  double reward = 0;           // predicted seconds
  PoolRecord draft;            // graph, hash, size, artifacts on success
};

// Must be safe to call concurrently on different graphs.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const graph::ComputationGraph& g) = 0;
};

struct PipelineOptions {
  std::size_t node_budget = 20000;
  unsigned frames = 5;
  double dynamic_budget_s = 10;
  // Propagation cap on the dynamic run; keeps features independent of machine load.
  std::uint64_t dynamic_budget_propagations = 5'000'000;
  std::string artifact_dir;  // empty: nothing persisted
};

// schedule Basic and Optimized, miter, bitblast, features, predict.
class PipelineEvaluator : public Evaluator {
 public:
  PipelineEvaluator(predictor::GbrtModel model, PipelineOptions options);
  Evaluation evaluate(const graph::ComputationGraph& g) override;

 private:
  predictor::GbrtModel model_;
  PipelineOptions options_;
};

struct EvolveConfig {
  std::size_t max_pool = 60;   // M_max
  std::size_t init_pool = 10;  // N_init
  std::uint64_t seed = 1;
  unsigned action_cap = 40;
  std::string checker = "internal";
  unsigned frames = 5;
  double dynamic_budget_s = 10;
  unsigned workers = 1;
  double alpha0 = 1;
  double beta0 = 1;
  std::size_t node_budget = 20000;
  // Loop iterations after initialization; 0 means unbounded.
  std::uint64_t max_iterations = 2000;
  // Fresh initial and baseline graphs draw their length from [1, init_max_length].
  unsigned init_max_length = 8;
  graph::GenerationConfig generation;
  std::string run_dir;  // empty: in-memory only
  // Called after every logged event, on the coordinating thread.
  std::function<void(const struct AdmissionEvent&)> observer;

  // Throws ConfigError.
  void validate() const;
};

struct AdmissionEvent {
  std::uint64_t iteration = 0;
  std::string phase;  // "init" or "loop"
  Strategy strategy = Strategy::kGenerate;
  std::optional<graph::ActionKind> mutation_arm;
  std::optional<std::string> parent_hash;
  std::uint64_t action_seed = 0;
  unsigned length = 0;  // action_log length of the candidate
  std::string candidate_hash;
  bool success = false;
  std::string failure_reason;
  double reward = 0;
  std::optional<double> baseline;  // absent for initialization
  bool improved = false;
  bool admitted = false;
  std::size_t pool_size = 0;  // after this event

  bool operator==(const AdmissionEvent&) const = default;
};

std::string event_to_json(const AdmissionEvent& e);
AdmissionEvent event_from_json(const std::string& line);

struct RunState {
  Pool pool;
  std::vector<AdmissionEvent> log;
  BanditAgent switch_agent;
  BanditAgent mutation_agent;
  std::uint64_t next_iteration = 0;
  std::uint64_t loop_iterations = 0;
  std::uint64_t candidates_evaluated = 0;
};

// Initialization, then the two-agent loop. With cfg.run_dir set, pool.json
// and admission_log.jsonl are written as the run progresses.
RunState run(const EvolveConfig& cfg, Evaluator& evaluator);
// Continues a run from cfg.run_dir.
RunState resume(const EvolveConfig& cfg, Evaluator& evaluator);

std::string pool_to_json(const Pool& pool);
Pool pool_from_json(const std::string& text);

// Agents as implied by a log; used by resume and by audits.
void replay_agents(const std::vector<AdmissionEvent>& log, BanditAgent& switch_agent, BanditAgent& mutation_agent);

struct BaselineResult {
  std::size_t candidates = 0;
  std::size_t successes = 0;
  Pool pool;  // first max_pool successes, in draw order
};

// Fresh random graphs with the same length distribution as initialization,
// no agents and no admission filter.
BaselineResult random_baseline(const EvolveConfig& cfg, Evaluator& evaluator, std::size_t candidates);

double mean_qr(const Pool& pool);

}  // namespace evolvegen::evolve
