#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "evolvegen/common/error.hpp"
#include "evolvegen/evolve/evolve.hpp"

namespace evolvegen::evolve {

namespace fs = std::filesystem;

void EvolveConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (max_pool == 0) fail("max_pool must be positive");
  if (init_pool == 0) fail("init_pool must be positive");
  if (init_pool > max_pool) fail("init_pool exceeds max_pool");
  if (action_cap == 0 || action_cap > 40) fail("action_cap must be in [1, 40]");
  if (init_max_length == 0 || init_max_length > action_cap) fail("init_max_length must be in [1, action_cap]");
  if (frames == 0) fail("frames must be positive");
  if (!(dynamic_budget_s > 0)) fail("dynamic_budget_s must be positive");
  if (workers == 0) fail("workers must be positive");
  if (!(alpha0 > 0) || !(beta0 > 0)) fail("prior parameters must be positive");
  if (node_budget == 0) fail("node_budget must be positive");
  if (checker.empty()) fail("checker must be named");
}

namespace {

constexpr std::uint64_t kBaselineStream = 0xBA5E1A7E;
constexpr std::size_t kInitAttemptsPerRecord = 50;

BanditAgent make_switch(const EvolveConfig& cfg) {
  return BanditAgent::make({"mutate", "generate"}, cfg.alpha0, cfg.beta0);
}

BanditAgent make_mutation(const EvolveConfig& cfg) {
  std::vector<std::string> labels;
  for (graph::ActionKind k : kMutationArms) labels.emplace_back(graph::action_kind_name(k));
  return BanditAgent::make(std::move(labels), cfg.alpha0, cfg.beta0);
}

std::size_t mutation_index(graph::ActionKind k) {
  for (std::size_t i = 0; i < std::size(kMutationArms); ++i) {
    if (kMutationArms[i] == k) return i;
  }
  throw std::logic_error("not a mutation arm");
}

struct Proposal {
  AdmissionEvent ev;
  std::optional<graph::ComputationGraph> graph;
  double parent_reward = 0;
};

Proposal propose_fresh(const EvolveConfig& cfg, Rng& rng, unsigned length) {
  Proposal p;
  p.ev.strategy = Strategy::kGenerate;
  p.ev.action_seed = rng.next();
  p.ev.length = length;
  try {
    Rng g(p.ev.action_seed);
    p.graph = graph::generate_fresh(g, length, cfg.generation);
  } catch (const Error& e) {
    p.ev.failure_reason = std::string(error_code_name(e.code()));
  }
  return p;
}

unsigned init_length(const EvolveConfig& cfg, Rng& rng) {
  return static_cast<unsigned>(1 + rng.index(cfg.init_max_length));
}

Proposal propose_init(const EvolveConfig& cfg, std::uint64_t iteration) {
  Rng rng(derive_seed(cfg.seed, iteration));
  Proposal p = propose_fresh(cfg, rng, init_length(cfg, rng));
  p.ev.iteration = iteration;
  p.ev.phase = "init";
  return p;
}

Proposal propose_loop(const EvolveConfig& cfg, const RunState& st, std::uint64_t iteration) {
  Rng rng(derive_seed(cfg.seed, iteration));
  const Strategy s = st.pool.empty() ? Strategy::kGenerate : static_cast<Strategy>(thompson_select(st.switch_agent, rng));
  Proposal p;
  if (s == Strategy::kGenerate) {
    double mean_len = 0;
    for (const PoolRecord& r : st.pool.records) mean_len += static_cast<double>(r.graph.action_log.size());
    if (!st.pool.empty()) mean_len /= static_cast<double>(st.pool.size());
    const auto len = static_cast<unsigned>(std::clamp<double>(std::round(mean_len), 1, cfg.action_cap));
    p = propose_fresh(cfg, rng, len);
  } else {
    const PoolRecord& parent = select_from_pool(st.pool);
    // Arms that cannot place anything in this parent are masked out;
    // otherwise their untouched posterior keeps winning the draw.
    std::vector<bool> allowed;
    for (graph::ActionKind k : kMutationArms) allowed.push_back(graph::action_applicable(parent.graph, k, cfg.generation));
    const graph::ActionKind kind = kMutationArms[thompson_select(st.mutation_agent, rng, allowed)];
    p.ev.strategy = Strategy::kMutate;
    p.ev.mutation_arm = kind;
    p.ev.parent_hash = parent.graph_hash;
    p.ev.action_seed = rng.next();
    p.ev.length = static_cast<unsigned>(parent.graph.action_log.size() + 1);
    p.parent_reward = parent.predicted_time_s;
    if (parent.graph.action_log.size() >= cfg.action_cap) {
      p.ev.failure_reason = "ActionCap";
    } else {
      try {
        Rng g(p.ev.action_seed);
        p.graph = graph::apply_action(parent.graph, {kind, std::nullopt, std::nullopt, 0}, g, cfg.generation);
      } catch (const Error& e) {
        p.ev.failure_reason = std::string(error_code_name(e.code()));
      }
    }
  }
  p.ev.iteration = iteration;
  p.ev.phase = "loop";
  return p;
}

// Evaluates proposals on up to `workers` threads. Results come back by value,
// in proposal order. Graphs already in the cache are not re-evaluated.
class Batch {
 public:
  Batch(Evaluator& ev, unsigned workers, std::map<std::string, Evaluation>& cache)
      : ev_(ev), workers_(workers), cache_(cache) {}

  std::vector<Evaluation> run(const std::vector<const graph::ComputationGraph*>& graphs) {
    std::vector<Evaluation> out(graphs.size());
    std::vector<std::string> hashes(graphs.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (!graphs[i]) continue;
      hashes[i] = graph::canonical_hash(*graphs[i]);
      auto it = cache_.find(hashes[i]);
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        todo.push_back(i);
      }
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < todo.size();) out[todo[k]] = ev_.evaluate(*graphs[todo[k]]);
    };
    const unsigned n = std::min<std::size_t>(workers_, todo.size());
    if (n <= 1) {
      work();
    } else {
      std::vector<std::thread> threads;
      for (unsigned t = 0; t < n; ++t) threads.emplace_back(work);
      for (auto& t : threads) t.join();
    }
    for (std::size_t i : todo) cache_.emplace(hashes[i], out[i]);
    return out;
  }

 private:
  Evaluator& ev_;
  unsigned workers_;
  std::map<std::string, Evaluation>& cache_;
};

class Persist {
 public:
  explicit Persist(const std::string& dir) : dir_(dir) {}

  void write_pool(const Pool& pool) {
    if (dir_.empty()) return;
    fs::path tmp = fs::path(dir_) / "pool.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << pool_to_json(pool);
      if (!out) throw IoError("cannot write " + tmp.string());
    }
    fs::rename(tmp, fs::path(dir_) / "pool.json");
  }

  void append(const AdmissionEvent& e) {
    if (dir_.empty()) return;
    if (!log_.is_open()) {
      log_.open(fs::path(dir_) / "admission_log.jsonl", std::ios::app);
      if (!log_) throw IoError("cannot open admission log in " + dir_);
    }
    log_ << event_to_json(e) << '\n';
    log_.flush();
  }

 private:
  std::string dir_;
  std::ofstream log_;
};

// Applies one evaluated proposal to the run state.
void process(const EvolveConfig& cfg, RunState& st, Proposal& p, const Evaluation* ev, Persist& out) {
  AdmissionEvent& e = p.ev;
  if (ev) {
    e.candidate_hash = ev->draft.graph_hash;
    if (st.pool.contains(e.candidate_hash)) {
      e.failure_reason = "Duplicate";
    } else if (!ev->success) {
      e.failure_reason = ev->failure_reason;
    } else {
      e.success = true;
      e.reward = ev->reward;
    }
    ++st.candidates_evaluated;
  }
  if (e.success) {
    if (e.phase == "init") {
      e.admitted = true;
    } else {
      double base = 0;
      if (e.strategy == Strategy::kMutate) {
        base = p.parent_reward;
      } else if (!st.pool.empty()) {
        base = average_pool_performance(st.pool);
      }
      e.baseline = base;
      e.improved = e.reward > base;
      e.admitted = e.improved;
      agent_update(st.switch_agent, static_cast<std::size_t>(e.strategy), e.improved);
      if (e.strategy == Strategy::kMutate) agent_update(st.mutation_agent, mutation_index(*e.mutation_arm), e.improved);
    }
  }
  if (e.admitted) {
    PoolRecord r = ev->draft;
    r.parent_hash = e.parent_hash;
    r.action_applied = e.mutation_arm;
    st.pool.admit(std::move(r));
  }
  e.pool_size = st.pool.size();
  if (e.admitted) out.write_pool(st.pool);
  out.append(e);
  st.log.push_back(e);
  if (cfg.observer) cfg.observer(e);
  if (e.phase == "loop") ++st.loop_iterations;
  st.next_iteration = e.iteration + 1;
}

void continue_run(const EvolveConfig& cfg, Evaluator& evaluator, RunState& st) {
  std::map<std::string, Evaluation> cache;
  Batch batch(evaluator, cfg.workers, cache);
  Persist out(cfg.run_dir);

  // Initialization: independent fresh graphs, evaluated `workers` at a time.
  // Proposals past the point where the pool fills are discarded unlogged.
  const std::uint64_t init_limit = kInitAttemptsPerRecord * cfg.init_pool;
  bool in_init = std::none_of(st.log.begin(), st.log.end(), [](const AdmissionEvent& e) { return e.phase == "loop"; });
  while (in_init && st.pool.size() < cfg.init_pool && st.next_iteration < init_limit) {
    std::vector<Proposal> props;
    for (unsigned w = 0; w < cfg.workers && st.next_iteration + w < init_limit; ++w) {
      props.push_back(propose_init(cfg, st.next_iteration + w));
    }
    std::vector<const graph::ComputationGraph*> graphs;
    for (const Proposal& p : props) graphs.push_back(p.graph ? &*p.graph : nullptr);
    std::vector<Evaluation> evs = batch.run(graphs);
    for (std::size_t i = 0; i < props.size() && st.pool.size() < cfg.init_pool; ++i) {
      process(cfg, st, props[i], props[i].graph ? &evs[i] : nullptr, out);
    }
  }

  // Each iteration depends on the agents updated by the previous one, so the
  // loop proposes and evaluates one candidate at a time.
  while (st.pool.size() < cfg.max_pool && (cfg.max_iterations == 0 || st.loop_iterations < cfg.max_iterations)) {
    Proposal p = propose_loop(cfg, st, st.next_iteration);
    std::vector<Evaluation> evs = batch.run({p.graph ? &*p.graph : nullptr});
    process(cfg, st, p, p.graph ? &evs[0] : nullptr, out);
  }
}

void prepare_dir(const EvolveConfig& cfg) {
  if (cfg.run_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(cfg.run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + cfg.run_dir + ": " + ec.message());
}

}  // namespace

void replay_agents(const std::vector<AdmissionEvent>& log, BanditAgent& switch_agent, BanditAgent& mutation_agent) {
  for (const AdmissionEvent& e : log) {
    if (e.phase != "loop" || !e.success) continue;
    agent_update(switch_agent, static_cast<std::size_t>(e.strategy), e.improved);
    if (e.strategy == Strategy::kMutate) agent_update(mutation_agent, mutation_index(*e.mutation_arm), e.improved);
  }
}

RunState run(const EvolveConfig& cfg, Evaluator& evaluator) {
  cfg.validate();
  prepare_dir(cfg);
  if (!cfg.run_dir.empty()) {
    fs::remove(fs::path(cfg.run_dir) / "admission_log.jsonl");
    fs::remove(fs::path(cfg.run_dir) / "pool.json");
  }
  RunState st;
  st.switch_agent = make_switch(cfg);
  st.mutation_agent = make_mutation(cfg);
  continue_run(cfg, evaluator, st);
  return st;
}

RunState resume(const EvolveConfig& cfg, Evaluator& evaluator) {
  cfg.validate();
  if (cfg.run_dir.empty()) throw ConfigError("resume needs a run directory");
  const fs::path log_path = fs::path(cfg.run_dir) / "admission_log.jsonl";
  RunState st;
  st.switch_agent = make_switch(cfg);
  st.mutation_agent = make_mutation(cfg);

  // A kill can leave a torn last line; keep the complete prefix only.
  std::string good;
  {
    std::ifstream in(log_path);
    if (!in) throw IoError("no admission log in " + cfg.run_dir);
    std::string line;
    while (std::getline(in, line)) {
      if (in.eof()) break;  // no trailing newline: torn write
      AdmissionEvent e;
      try {
        e = event_from_json(line);
      } catch (const SchemaViolation&) {
        break;
      }
      st.log.push_back(e);
      good += line + '\n';
    }
  }
  {
    std::ofstream out(log_path, std::ios::trunc);
    out << good;
  }

  // pool.json is written before the log line, so it may hold one record the
  // log never admitted.
  std::size_t admitted = 0;
  for (const AdmissionEvent& e : st.log) admitted += e.admitted ? 1 : 0;
  Pool pool;
  if (fs::exists(fs::path(cfg.run_dir) / "pool.json")) {
    std::ifstream in(fs::path(cfg.run_dir) / "pool.json");
    std::stringstream ss;
    ss << in.rdbuf();
    pool = pool_from_json(ss.str());
  }
  if (pool.size() < admitted) throw SchemaViolation("pool.json is behind the admission log");
  pool.records.resize(admitted);
  st.pool = std::move(pool);

  replay_agents(st.log, st.switch_agent, st.mutation_agent);
  for (const AdmissionEvent& e : st.log) {
    if (e.phase == "loop") ++st.loop_iterations;
    if (!e.candidate_hash.empty()) ++st.candidates_evaluated;
  }
  if (!st.log.empty()) st.next_iteration = st.log.back().iteration + 1;
  continue_run(cfg, evaluator, st);
  return st;
}

BaselineResult random_baseline(const EvolveConfig& cfg, Evaluator& evaluator, std::size_t candidates) {
  cfg.validate();
  BaselineResult res;
  res.candidates = candidates;
  std::vector<std::optional<graph::ComputationGraph>> graphs(candidates);
  for (std::size_t k = 0; k < candidates; ++k) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kBaselineStream), k));
    graphs[k] = propose_fresh(cfg, rng, init_length(cfg, rng)).graph;
  }
  std::vector<const graph::ComputationGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(g ? &*g : nullptr);
  std::map<std::string, Evaluation> cache;
  std::vector<Evaluation> evs = Batch(evaluator, cfg.workers, cache).run(ptrs);
  for (std::size_t k = 0; k < candidates; ++k) {
    if (!graphs[k] || !evs[k].success) continue;
    ++res.successes;
    if (res.pool.size() < cfg.max_pool && !res.pool.contains(evs[k].draft.graph_hash)) res.pool.admit(evs[k].draft);
  }
  return res;
}

}  // namespace evolvegen::evolve
