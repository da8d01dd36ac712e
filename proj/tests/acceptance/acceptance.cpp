// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Tolerances are printed next to each measured value.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/interpret.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/evolve/evolve.hpp"
#include "evolvegen/miter/miter.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/predictor/predictor.hpp"
#include "evolvegen/sat/dimacs.hpp"
#include "evolvegen/sat/solver.hpp"
#include "support/aig_oracle.hpp"
#include "support/cnf_oracle.hpp"
#include "support/synthetic_evaluator.hpp"

namespace {

using namespace evolvegen;
namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string log;  // compared across runs by the determinism criterion
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::uint64_t latency(const ts::TransitionSystem& t) {
  std::vector<Word> zeros(t.inputs().size(), 0);
  auto c = ts::simulate(t, zeros, 1'000'000).first_valid_cycle;
  if (!c) throw std::runtime_error("schedule never raises valid");
  return *c;
}

// Graphs shared by the schedule and miter criteria.
std::vector<graph::ComputationGraph> suite_graphs() {
  std::vector<graph::ComputationGraph> out;
  for (std::uint64_t i = 0; i < 500; ++i) {
    Rng rng(derive_seed(1, i));
    out.push_back(graph::generate_fresh(rng, static_cast<unsigned>(rng.uniform_int(1, 20))));
  }
  return out;
}

Outcome schedule_equivalence() {
  const auto graphs = suite_graphs();
  std::size_t mismatches = 0, vectors = 0, exhaustive = 0;
  std::ostringstream log;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const graph::ComputationGraph& g = graphs[gi];
    if (!graph::validate(g).ok()) {
      ++mismatches;
      continue;
    }
    ts::TransitionSystem tb = compile::schedule(g, {compile::ScheduleKind::kBasic});
    ts::TransitionSystem to = compile::schedule(g, {compile::ScheduleKind::kOptimized});
    unsigned total = 0;
    for (const auto& in : g.inputs) total += in.width;
    std::vector<std::vector<Word>> vecs;
    if (total <= 12) {
      ++exhaustive;
      for (std::uint64_t x = 0; x < (1ull << total); ++x) {
        std::vector<Word> v;
        unsigned shift = 0;
        for (const auto& in : g.inputs) {
          v.push_back((x >> shift) & width_mask(in.width));
          shift += in.width;
        }
        vecs.push_back(v);
      }
    } else {
      Rng rng(derive_seed(2, gi));
      for (int k = 0; k < 100; ++k) {
        std::vector<Word> v;
        for (const auto& in : g.inputs) v.push_back(rng.next() & width_mask(in.width));
        vecs.push_back(v);
      }
    }
    std::uint64_t digest = 0;
    for (const auto& v : vecs) {
      ++vectors;
      const Word want = compile::interpret_result(g, v);
      bool bad = false;
      for (const ts::TransitionSystem* t : {&tb, &to}) {
        ts::Trace tr = ts::simulate(*t, v, 1'000'000);
        bad = bad || !tr.first_valid_cycle || tr.result_at_valid != want;
      }
      mismatches += bad ? 1 : 0;
      digest = derive_seed(digest, static_cast<std::uint64_t>(want));
    }
    log << graph::canonical_hash(g) << ' ' << vecs.size() << ' ' << digest << '\n';
  }
  return {mismatches == 0,
          std::to_string(graphs.size()) + " graphs, " + std::to_string(vectors) + " vectors (" +
              std::to_string(exhaustive) + " graphs exhaustive), mismatches " + std::to_string(mismatches) +
              " (tolerance 0)",
          log.str()};
}

Outcome miter_soundness() {
  const auto graphs = suite_graphs();
  std::size_t alarms = 0, complete = 0;
  for (const graph::ComputationGraph& g : graphs) {
    ts::TransitionSystem a = compile::schedule(g, {compile::ScheduleKind::kBasic});
    ts::TransitionSystem b = compile::schedule(g, {compile::ScheduleKind::kOptimized});
    netlist::AigCircuit c = netlist::bitblast_property(miter::build_miter(a, b));
    const auto bound = static_cast<unsigned>(std::max(latency(a), latency(b)) + 4);
    checker::CheckResult r = checker::bmc(c, {bound, 30});
    if (r.verdict == checker::Verdict::kUnsafe) ++alarms;
    if (r.reason == "bound") ++complete;
  }
  return {alarms == 0,
          std::to_string(graphs.size()) + " miters, BMC to latency+4 (30 s each): false alarms " +
              std::to_string(alarms) + " (tolerance 0), bound reached on " + std::to_string(complete),
          ""};
}

std::size_t arity(ts::ExprOp op) {
  switch (op) {
    case ts::ExprOp::kConst:
    case ts::ExprOp::kInput:
    case ts::ExprOp::kState: return 0;
    case ts::ExprOp::kNot:
    case ts::ExprOp::kZext:
    case ts::ExprOp::kSext:
    case ts::ExprOp::kExtract: return 1;
    case ts::ExprOp::kIte: return 3;
    default: return 2;
  }
}

bool is_control_state(const std::string& name) {
  return name == "pc" || name == "done" || name.rfind("ctr", 0) == 0;
}

// Nodes reachable from `roots`, following state registers into their next
// expressions when `follow` accepts them.
std::set<ts::ExprId> cone(const ts::TransitionSystem& t, std::vector<ts::ExprId> stack,
                          const std::function<bool(const std::string&)>& follow) {
  std::set<ts::ExprId> seen;
  while (!stack.empty()) {
    ts::ExprId e = stack.back();
    stack.pop_back();
    if (!seen.insert(e).second) continue;
    const ts::ExprNode& n = t.expr(e);
    if (n.op == ts::ExprOp::kState && follow(t.states()[n.aux].name)) stack.push_back(t.states()[n.aux].next);
    for (std::size_t i = 0; i < arity(n.op); ++i) stack.push_back(n.args[i]);
  }
  return seen;
}

// Data-path constants: in the cone of result, outside the cone of valid and
// of the control registers.
std::vector<ts::ExprId> data_constants(const ts::TransitionSystem& t) {
  std::vector<ts::ExprId> control_roots{*t.output("valid")};
  for (const auto& s : t.states()) {
    if (is_control_state(s.name)) control_roots.push_back(s.next);
  }
  const auto control = cone(t, control_roots, is_control_state);
  std::vector<ts::ExprId> out;
  for (ts::ExprId e : cone(t, {*t.output("result")}, [](const std::string&) { return true; })) {
    if (t.expr(e).op == ts::ExprOp::kConst && !control.count(e)) out.push_back(e);
  }
  return out;
}

// Copy of `t` with one constant node replaced.
ts::TransitionSystem with_constant(const ts::TransitionSystem& t, ts::ExprId target, Word value) {
  ts::TransitionSystem o;
  for (const auto& in : t.inputs()) o.add_input(in.name, in.width);
  for (const auto& s : t.states()) o.add_state(s.name, s.width, s.init);
  std::vector<ts::ExprId> map(t.num_exprs());
  for (ts::ExprId e = 0; e < t.num_exprs(); ++e) {
    const ts::ExprNode& n = t.expr(e);
    auto a = [&](int i) { return map[n.args[i]]; };
    switch (n.op) {
      case ts::ExprOp::kConst: map[e] = o.constant(n.width, e == target ? value : n.value); break;
      case ts::ExprOp::kInput: map[e] = o.input_ref(n.aux); break;
      case ts::ExprOp::kState: map[e] = o.state_ref(n.aux); break;
      case ts::ExprOp::kNot: map[e] = o.op1(n.op, a(0)); break;
      case ts::ExprOp::kIte: map[e] = o.ite(a(0), a(1), a(2)); break;
      case ts::ExprOp::kZext: map[e] = o.zext(a(0), n.width); break;
      case ts::ExprOp::kSext: map[e] = o.sext(a(0), n.width); break;
      case ts::ExprOp::kExtract: map[e] = o.extract(a(0), n.aux, n.width); break;
      default: map[e] = o.op2(n.op, a(0), a(1)); break;
    }
  }
  for (std::uint32_t s = 0; s < t.states().size(); ++s) o.set_next(s, map[t.states()[s].next]);
  for (const auto& out : t.outputs()) o.set_output(out.name, map[out.expr]);
  return o;
}

// Mutants are drawn as one flipped bit in one data-path constant of the
// Optimized schedule. Only output corruptions count: the mutant must raise
// valid with a result differing from the graph interpreter on some random
// vector. The rest are tallied as not observed.
Outcome miter_sensitivity() {
  graph::GenerationConfig cfg;
  cfg.max_width = 6;
  cfg.max_trip = 4;
  int drawn = 0, unobserved = 0, mutants = 0, caught = 0, replayed = 0, unobserved_caught = 0;
  for (std::uint64_t seed = 0; mutants < 100 && seed < 10'000; ++seed) {
    Rng rng(derive_seed(3, seed));
    graph::ComputationGraph g = graph::generate_fresh(rng, static_cast<unsigned>(rng.uniform_int(1, 10)), cfg);
    ts::TransitionSystem a = compile::schedule(g, {compile::ScheduleKind::kBasic});
    ts::TransitionSystem b = compile::schedule(g, {compile::ScheduleKind::kOptimized});
    auto consts = data_constants(b);
    if (consts.empty()) continue;
    const ts::ExprId target = consts[rng.index(consts.size())];
    const ts::ExprNode& n = b.expr(target);
    ts::TransitionSystem bad_b = with_constant(b, target, n.value ^ (Word{1} << rng.index(n.width)));
    ++drawn;
    bool observed = false;
    for (int k = 0; k < 300 && !observed; ++k) {
      std::vector<Word> v;
      for (const auto& in : g.inputs) v.push_back(rng.next() & width_mask(in.width));
      ts::Trace tr = ts::simulate(bad_b, v, 1'000'000);
      observed = tr.first_valid_cycle && tr.result_at_valid != compile::interpret_result(g, v);
    }
    const std::uint64_t lat = std::max(latency(a), latency(bad_b));
    netlist::AigCircuit c = netlist::bitblast_property(miter::build_miter(a, bad_b));
    checker::CheckResult r = checker::bmc(c, static_cast<unsigned>(lat + 4));
    const bool found = r.verdict == checker::Verdict::kUnsafe;
    if (!observed) {
      ++unobserved;
      unobserved_caught += found ? 1 : 0;
      continue;
    }
    ++mutants;
    if (found) {
      ++caught;
      replayed += checker::replay_trace(c, *r.trace) ? 1 : 0;
    }
  }
  return {mutants == 100 && caught >= 95 && replayed == caught,
          "caught " + std::to_string(caught) + "/" + std::to_string(mutants) +
              " output corruptions (need >= 95), traces replayed " + std::to_string(replayed) + "/" +
              std::to_string(caught) + "; of " + std::to_string(drawn) + " drawn, " + std::to_string(unobserved) +
              " showed no output difference in 300 vectors and BMC flagged " + std::to_string(unobserved_caught) +
              " of those",
          ""};
}

Outcome sat_oracle() {
  Rng rng(4);
  int wrong = 0, cores = 0, bad_cores = 0;
  for (int i = 0; i < 2000; ++i) {
    sat::Cnf cnf = testing::random_3cnf(rng, 20);
    std::vector<sat::Lit> assumptions;
    if (i % 2) {
      for (int k = 0; k < 3; ++k) {
        assumptions.push_back(
            sat::Lit::make(static_cast<sat::Var>(rng.index(static_cast<std::size_t>(cnf.num_vars))), rng.bernoulli(0.5)));
      }
    }
    sat::Solver s;
    sat::load(s, cnf);
    const sat::Status st = s.solve(assumptions);
    const bool truth = testing::truth_table_sat(cnf, assumptions);
    if ((st == sat::Status::kSat) != truth) {
      ++wrong;
      continue;
    }
    if (st == sat::Status::kSat) {
      if (!testing::model_satisfies(cnf, s.model())) ++wrong;
    } else {
      ++cores;
      bool ok = !testing::truth_table_sat(cnf, s.core());
      for (sat::Lit l : s.core()) ok = ok && std::find(assumptions.begin(), assumptions.end(), l) != assumptions.end();
      bad_cores += ok ? 0 : 1;
    }
  }
  return {wrong == 0 && bad_cores == 0,
          "2000 instances, verdict/model errors " + std::to_string(wrong) + " (tolerance 0), unsat cores " +
              std::to_string(cores) + " with " + std::to_string(bad_cores) + " failing re-verification",
          ""};
}

Outcome pdr_oracle() {
  Rng rng(5);
  int wrong = 0, safe = 0, unsafe = 0, bad_proofs = 0, bad_traces = 0;
  std::uint32_t max_latches = 0;
  unsigned deepest = 0;
  for (int i = 0; i < 200; ++i) {
    netlist::AigCircuit c = testing::random_aig(rng, 3, 16, 60);
    if (i % 2 && c.num_latches() >= 2) {
      // Bad as a conjunction of latch literals: deeper and more often unreachable.
      const std::uint32_t first_latch = 1 + c.num_inputs;
      netlist::AigLit acc = netlist::aig_make(first_latch + static_cast<std::uint32_t>(rng.index(c.num_latches())),
                                              rng.bernoulli(0.5));
      for (auto k = rng.uniform_int(1, 3); k > 0; --k) {
        const netlist::AigLit l = netlist::aig_make(
            first_latch + static_cast<std::uint32_t>(rng.index(c.num_latches())), rng.bernoulli(0.5));
        const netlist::AigLit v = netlist::aig_make(c.max_var() + 1);
        c.and_gates.push_back({v, std::max(acc, l), std::min(acc, l)});
        acc = v;
      }
      c.bad = {acc};
    }
    if (c.bad.empty()) c.bad.push_back(c.max_var() > 0 ? netlist::aig_make(c.max_var(), rng.bernoulli(0.5)) : 0);
    max_latches = std::max(max_latches, c.num_latches());
    const auto depth = testing::explicit_bad_depth(c);
    if (depth) deepest = std::max(deepest, *depth);
    checker::CheckResult r = checker::pdr(c, {});
    const checker::Verdict want = depth ? checker::Verdict::kUnsafe : checker::Verdict::kSafe;
    if (r.verdict != want) {
      ++wrong;
    } else if (depth) {
      ++unsafe;
      bad_traces += checker::replay_trace(c, *r.trace) ? 0 : 1;
    } else {
      ++safe;
      bad_proofs += checker::verify_invariant(c, r.invariant) ? 0 : 1;
    }
  }
  return {wrong == 0 && bad_proofs == 0 && bad_traces == 0,
          "200 AIGs (<= 16 latches): verdict mismatches " + std::to_string(wrong) + " (tolerance 0), safe " +
              std::to_string(safe) + " with " + std::to_string(bad_proofs) + " failed invariant checks, unsafe " +
              std::to_string(unsafe) + " with " + std::to_string(bad_traces) + " failed replays (deepest " +
              std::to_string(deepest) + ", up to " + std::to_string(max_latches) + " latches)",
          ""};
}

Outcome formats() {
  Rng rng(6);
  int bad = 0;
  for (int i = 0; i < 500; ++i) {
    netlist::AigCircuit c = testing::random_aig(rng, 6, 6, 40, i % 2 == 0);
    for (auto mode : {netlist::AigerMode::kAscii, netlist::AigerMode::kBinary}) {
      bad += netlist::read_aiger(netlist::write_aiger(c, mode)) == c ? 0 : 1;
    }
  }
  netlist::AigCircuit empty, buffer;
  buffer.num_inputs = 1;
  buffer.outputs = {2};
  const bool golden = netlist::write_aiger(empty, netlist::AigerMode::kAscii) == "aag 0 0 0 0 0\n" &&
                      netlist::write_aiger(buffer, netlist::AigerMode::kAscii) == "aag 1 1 0 1 0\n2\n2\n" &&
                      netlist::read_aiger("aag 0 0 0 0 0\n") == empty &&
                      netlist::read_aiger("aag 1 1 0 1 0\n2\n2\n") == buffer;
  return {bad == 0 && golden,
          "500 circuits x 2 modes, round-trip failures " + std::to_string(bad) + " (tolerance 0), golden files " +
              (golden ? "match" : "differ"),
          ""};
}

Outcome bandit_convergence() {
  const double p[4] = {0.1, 0.2, 0.3, 0.8};
  std::vector<double> shares;
  int checked = 0, off = 0;
  double worst = 0;
  std::ostringstream log;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    evolve::BanditAgent a = evolve::BanditAgent::make({"a", "b", "c", "d"});
    Rng rng(seed);
    for (int round = 0; round < 1000; ++round) {
      const std::size_t arm = evolve::thompson_select(a, rng);
      evolve::agent_update(a, arm, rng.bernoulli(p[arm]));
      log << arm;
    }
    log << '\n';
    shares.push_back(static_cast<double>(a.arms[3].pulls) / 1000);
    for (std::size_t i = 0; i < 4; ++i) {
      if (a.arms[i].pulls < 100) continue;
      ++checked;
      const double err = std::abs(a.arms[i].mean() - p[i]);
      worst = std::max(worst, err);
      off += err > 0.1 ? 1 : 0;
    }
  }
  const double med = median(shares);
  return {med > 0.6 && off == 0,
          "median best-arm share " + fmt("%.3f", med) + " (need > 0.6), posterior error max " + fmt("%.3f", worst) +
              " over " + std::to_string(checked) + " arms with >= 100 pulls (tolerance 0.1)",
          log.str()};
}

Outcome algorithm_fidelity() {
  int wins = 0;
  std::size_t admitted = 0, sound = 0;
  std::ostringstream log;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testing::LoopRewardEvaluator ev;
    evolve::EvolveConfig cfg;
    cfg.seed = seed;
    cfg.init_pool = 5;
    cfg.max_pool = 1'000'000;
    cfg.max_iterations = 300;
    evolve::RunState st = evolve::run(cfg, ev);
    const auto& arms = st.mutation_agent.arms;
    bool best = true;
    for (std::size_t i = 0; i < arms.size(); ++i) best = best && (i == 2 || arms[i].mean() < arms[2].mean());
    wins += best ? 1 : 0;
    for (const auto& e : st.log) {
      log << evolve::event_to_json(e) << '\n';
      if (e.phase != "loop" || !e.admitted) continue;
      ++admitted;
      sound += e.baseline && e.reward > *e.baseline ? 1 : 0;
    }
  }
  return {wins >= 18 && sound == admitted,
          "AddLoop posterior mean on top after 300 iterations in " + std::to_string(wins) +
              "/20 seeds (need >= 18), admissions with reward > baseline " + std::to_string(sound) + "/" +
              std::to_string(admitted) + " (need all)",
          log.str()};
}

struct Workspace {
  fs::path dir;
  fs::path model;
};

Outcome predictor_quality(Workspace& ws) {
  const fs::path corpus = ws.dir / "corpus";
  fs::remove_all(corpus);
  evolve::CorpusStats cs = evolve::write_random_corpus(corpus.string(), 2024, 300, 8, {}, 20000);
  predictor::DatasetOptions o;
  o.timeout_s = 60;
  o.max_label_s = 60;
  predictor::Dataset d = predictor::build_dataset(corpus.string(), o);
  std::vector<predictor::LabeledExample> train_set, holdout;
  predictor::split_dataset(d.examples, 7, train_set, holdout);
  const auto t0 = std::chrono::steady_clock::now();
  predictor::GbrtModel m = predictor::train(train_set, {});
  const double train_s = seconds_since(t0);
  double r2 = -1;
  std::string note;
  try {
    r2 = predictor::evaluate_r2(m, holdout);
  } catch (const DegenerateData& e) {
    note = std::string(", ") + e.what();
  }
  ws.model = ws.dir / "model.json";
  std::ofstream(ws.model) << predictor::model_to_json(m);
  return {r2 >= 0.4 && train_s <= 300,
          std::to_string(cs.written) + " problems, " + std::to_string(d.examples.size()) + " kept (" +
              std::to_string(d.provenance.excluded_frames) + " beyond five frames, " +
              std::to_string(d.provenance.excluded_time) + " over 60 s), holdout R2 " + fmt("%.3f", r2) +
              " on " + std::to_string(holdout.size()) + " (need >= 0.4), training " + fmt("%.2f", train_s) +
              " s (limit 300)" + note,
          ""};
}

struct Shell {
  int status = -1;
  std::string out;
};

Shell sh(const std::string& cmd) {
  Shell r;
  FILE* p = ::popen(cmd.c_str(), "r");
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome end_to_end(const Workspace& ws, const std::string& tag, bool with_baseline) {
  std::vector<double> ratios, qr_ratios;
  std::ostringstream detail, log;
  double slowest = 0;
  bool ok = true;
  for (int seed = 1; seed <= 5; ++seed) {
    const fs::path run_dir = ws.dir / (tag + std::to_string(seed));
    fs::remove_all(run_dir);
    const std::string common = std::string(EVOLVEGEN_CLI) + " --seed " + std::to_string(seed) + " --model " +
                               ws.model.string() + " ";
    const auto t0 = std::chrono::steady_clock::now();
    Shell e = sh("EVOLVEGEN_MAX_POOL=60 EVOLVEGEN_INIT_POOL=10 " + common + "evolve --out " + run_dir.string());
    slowest = std::max(slowest, seconds_since(t0));
    if (e.status != 0) {
      ok = false;
      detail << " seed " << seed << " evolve exit " << e.status;
      continue;
    }
    log << read_file(run_dir / "admission_log.jsonl");
    if (!with_baseline) continue;
    json ej = json::parse(e.out);
    Shell b = sh("EVOLVEGEN_MAX_POOL=60 " + common + "baseline --candidates " +
                 std::to_string(ej["candidates_evaluated"].get<std::size_t>()));
    if (b.status != 0) {
      ok = false;
      detail << " seed " << seed << " baseline exit " << b.status;
      continue;
    }
    json bj = json::parse(b.out);
    const double r = ej["mean_predicted_s"].get<double>() / bj["mean_predicted_s"].get<double>();
    const double q = ej["mean_qr"].get<double>() / bj["mean_qr"].get<double>();
    ratios.push_back(r);
    qr_ratios.push_back(q);
    detail << " [seed " << seed << ": pool " << ej["pool_size"] << ", time x" << fmt("%.2f", r) << ", QR x"
           << fmt("%.2f", q) << "]";
  }
  if (!with_baseline) return {ok, "", log.str()};
  const double mr = ratios.empty() ? 0 : median(ratios);
  const double mq = qr_ratios.empty() ? 0 : median(qr_ratios);
  return {ok && ratios.size() == 5 && mr >= 1.2 && mq > 1 && slowest <= 3600,
          "median pool/baseline mean predicted time x" + fmt("%.2f", mr) + " (need >= 1.20), median QR ratio x" +
              fmt("%.2f", mq) + " (need > 1), slowest run " + fmt("%.0f", slowest) + " s (limit 3600);" +
              detail.str(),
          log.str()};
}

}  // namespace

// Optional arguments select criteria by number; default is all.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  Workspace ws;
  ws.dir = fs::temp_directory_path() / ("evolvegen_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(ws.dir);

  int failures = 0;
  std::map<int, Outcome> results;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    if (!only.empty() && !only.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), ""};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << " ["
              << fmt("%.1f", seconds_since(t0)) << " s]" << std::endl;
    results[id] = o;
  };

  report(1, "schedule equivalence", schedule_equivalence);
  report(2, "miter soundness", miter_soundness);
  report(3, "miter sensitivity", miter_sensitivity);
  report(4, "SAT oracle", sat_oracle);
  report(5, "PDR oracle", pdr_oracle);
  report(6, "AIGER formats", formats);
  report(7, "bandit convergence", bandit_convergence);
  report(8, "evolution loop fidelity", algorithm_fidelity);
  report(9, "predictor", [&] { return predictor_quality(ws); });
  report(10, "end-to-end evolve vs random", [&] { return end_to_end(ws, "run_a", true); });
  report(11, "determinism", [&] {
    std::vector<std::string> diff;
    if (schedule_equivalence().log != results[1].log) diff.push_back("1");
    if (bandit_convergence().log != results[7].log) diff.push_back("7");
    if (algorithm_fidelity().log != results[8].log) diff.push_back("8");
    if (results[10].log.empty() || end_to_end(ws, "run_b", false).log != results[10].log) diff.push_back("10");
    std::string which;
    for (const auto& d : diff) which += (which.empty() ? "" : ",") + d;
    return Outcome{diff.empty(),
                   "second runs of criteria 1, 7, 8, 10 (workers=1) " +
                       (diff.empty() ? std::string("bit-identical") : "differ in " + which),
                   ""};
  });

  fs::remove_all(ws.dir);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
