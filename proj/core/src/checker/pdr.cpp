#include <algorithm>
#include <set>
#include <stdexcept>

#include "encode.hpp"
#include "evolvegen/checker/checker.hpp"

namespace evolvegen::checker {

using namespace detail;

namespace {

// A cube is a conjunction of latch literals, sorted by latch.
using Cube = std::vector<StateLit>;

struct Abort {
  std::string reason;
};

enum class Phase { kSat, kGeneralize, kPush };

StateClause negate(const Cube& c) {
  StateClause cl;
  for (StateLit l : c) cl.push_back({l.latch, !l.negated});
  return cl;
}

bool subsumes(const Cube& small, const Cube& big) {
  return small.size() <= big.size() && std::includes(big.begin(), big.end(), small.begin(), small.end());
}

class Pdr {
 public:
  Pdr(const AigCircuit& aig, const PdrLimits& limits) : aig_(aig), lim_(limits), t0_(Clock::now()) {
    true_ = make_true(s_);
    encode(s_, true_, cur_, in_, next_, bad_);
    init_act_ = s_.new_lit();
    for (std::uint32_t i = 0; i < aig_.num_latches(); ++i) {
      switch (aig_.latches[i].init) {
        case netlist::LatchInit::kZero: s_.add_clause({~init_act_, ~cur_[i]}); break;
        case netlist::LatchInit::kOne: s_.add_clause({~init_act_, cur_[i]}); break;
        case netlist::LatchInit::kUndefined: break;
      }
    }
    act_.push_back(Lit{});  // level 0 is the initial states
    lemmas_.emplace_back();

    Lit ltrue = make_true(ls_);
    encode(ls_, ltrue, lcur_, lin_, lnext_, lbad_);
    latch_of_var_.assign(static_cast<std::size_t>(ls_.num_vars()), -1);
    for (std::uint32_t i = 0; i < lcur_.size(); ++i) latch_of_var_[static_cast<std::size_t>(lcur_[i].var())] = static_cast<int>(i);
  }

  CheckResult run() {
    CheckResult r;
    try {
      solve_main(r);
    } catch (const Abort& a) {
      r.verdict = Verdict::kUnknown;
      r.reason = a.reason;
    }
    r.pdr_stats = stats_;
    r.wall_time = seconds_since(t0_);
    return r;
  }

 private:
  struct Obligation {
    Cube cube;
    unsigned level;
    int parent;
    std::vector<bool> inputs;  // applied in this state
  };

  unsigned top() const { return static_cast<unsigned>(act_.size()) - 1; }

  void encode(sat::Solver& s, Lit tru, std::vector<Lit>& cur, std::vector<Lit>& in, std::vector<Lit>& next,
              Lit& bad) {
    FrameEncoder f(aig_, s, tru);
    for (std::uint32_t i = 0; i < aig_.num_inputs; ++i) {
      in.push_back(s.new_lit());
      f.set_input(i, in.back());
    }
    for (std::uint32_t i = 0; i < aig_.num_latches(); ++i) {
      cur.push_back(s.new_lit());
      f.set_latch(i, cur.back());
    }
    for (const auto& l : aig_.latches) next.push_back(f.lit(l.next));
    bad = f.bad_any();
  }

  sat::Status query(sat::Solver& s, const std::vector<Lit>& assumptions, Phase phase) {
    for (;;) {
      if (lim_.max_seconds > 0 && seconds_since(t0_) > lim_.max_seconds) throw Abort{"timeout"};
      std::uint64_t budget = 0;
      if (lim_.max_propagations > 0) {
        if (effort_ >= lim_.max_propagations) throw Abort{"budget"};
        budget = lim_.max_propagations - effort_;
      }
      if (lim_.max_seconds > 0) budget = budget ? std::min<std::uint64_t>(budget, 1'000'000) : 1'000'000;
      s.set_propagation_budget(budget);
      const std::uint64_t before = s.stats().propagations;
      const auto t = Clock::now();
      sat::Status st = s.solve(assumptions);
      const double dt = seconds_since(t);
      const std::uint64_t spent = s.stats().propagations - before;
      effort_ += spent;
      ++stats_.sat_calls;
      switch (phase) {
        case Phase::kSat:
          stats_.time_sat += dt;
          stats_.effort_sat += spent;
          break;
        case Phase::kGeneralize:
          stats_.time_generalize += dt;
          stats_.effort_generalize += spent;
          break;
        case Phase::kPush:
          stats_.time_push += dt;
          stats_.effort_push += spent;
          break;
      }
      if (st != sat::Status::kUnknown) return st;
    }
  }

  std::vector<Lit> frame_assumptions(unsigned level) const {
    if (level == 0) return {init_act_};
    std::vector<Lit> a;
    for (unsigned j = level; j <= top(); ++j) a.push_back(act_[j]);
    return a;
  }

  Lit cur_lit(StateLit l) const { return l.negated ? ~cur_[l.latch] : cur_[l.latch]; }
  Lit next_lit(StateLit l) const { return l.negated ? ~next_[l.latch] : next_[l.latch]; }

  bool intersects_init(const Cube& c) const {
    for (StateLit l : c) {
      auto init = aig_.latches[l.latch].init;
      if (init == netlist::LatchInit::kZero && !l.negated) return false;
      if (init == netlist::LatchInit::kOne && l.negated) return false;
    }
    return true;
  }

  Cube model_state() const {
    Cube c;
    for (std::uint32_t i = 0; i < cur_.size(); ++i) c.push_back({i, !s_.model_value(cur_[i])});
    return c;
  }

  std::vector<bool> model_inputs() const {
    std::vector<bool> v;
    for (Lit l : in_) v.push_back(s_.model_value(l));
    return v;
  }

  // Shrinks a full state to the literals needed for (state, inputs) to imply
  // the successor cube, or bad when succ is null.
  Cube lift(const Cube& state, const std::vector<bool>& inputs, const Cube* succ) {
    Lit t = ls_.new_lit();
    std::vector<Lit> tmp{~t};
    if (succ) {
      for (StateLit l : *succ) tmp.push_back(l.negated ? lnext_[l.latch] : ~lnext_[l.latch]);
    } else {
      tmp.push_back(~lbad_);
    }
    ls_.add_clause(tmp);
    std::vector<Lit> as{t};
    for (std::size_t i = 0; i < inputs.size(); ++i) as.push_back(inputs[i] ? lin_[i] : ~lin_[i]);
    for (StateLit l : state) as.push_back(l.negated ? ~lcur_[l.latch] : lcur_[l.latch]);
    sat::Status st = query(ls_, as, Phase::kSat);
    ls_.add_clause({~t});
    if (st != sat::Status::kUnsat) throw std::logic_error("pdr: lifting query is satisfiable");
    Cube out;
    for (Lit x : ls_.core()) {
      auto v = static_cast<std::size_t>(x.var());
      if (v < latch_of_var_.size() && latch_of_var_[v] >= 0) {
        out.push_back({static_cast<std::uint32_t>(latch_of_var_[v]), x.sign()});
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // F_{level-1} and not c and T and c'. On unsat, `reduced` receives the
  // core-reduced cube, kept disjoint from the initial states.
  bool blocked_relative(const Cube& c, unsigned level, Phase phase, Cube* reduced) {
    Lit t = s_.new_lit();
    std::vector<Lit> tmp{~t};
    for (StateLit l : c) tmp.push_back(~cur_lit(l));
    s_.add_clause(tmp);
    std::vector<Lit> as = frame_assumptions(level - 1);
    as.push_back(t);
    for (StateLit l : c) as.push_back(next_lit(l));
    sat::Status st = query(s_, as, phase);
    if (st == sat::Status::kSat) {
      last_pred_ = model_state();
      last_inputs_ = model_inputs();
      s_.add_clause({~t});
      return false;
    }
    if (reduced) {
      std::set<std::uint32_t> core;
      for (Lit x : s_.core()) core.insert(x.x);
      reduced->clear();
      for (StateLit l : c) {
        if (core.count(next_lit(l).x)) reduced->push_back(l);
      }
      if (intersects_init(*reduced)) {
        for (StateLit l : c) {
          if (!intersects_init({l})) {
            reduced->push_back(l);
            std::sort(reduced->begin(), reduced->end());
            break;
          }
        }
      }
    }
    s_.add_clause({~t});
    return true;
  }

  Cube generalize(Cube c, unsigned level) {
    for (std::size_t j = 0; j < c.size() && c.size() > 1;) {
      Cube cand = c;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(j));
      Cube reduced;
      if (!intersects_init(cand) && blocked_relative(cand, level, Phase::kGeneralize, &reduced)) {
        c = std::move(reduced);
      } else {
        ++j;
      }
    }
    return c;
  }

  void add_lemma(const Cube& c, unsigned level) {
    for (unsigned j = 1; j <= level; ++j) {
      auto& v = lemmas_[j];
      v.erase(std::remove_if(v.begin(), v.end(), [&](const Cube& d) { return subsumes(c, d); }), v.end());
    }
    lemmas_[level].push_back(c);
    std::vector<Lit> cl{~act_[level]};
    for (StateLit l : c) cl.push_back(~cur_lit(l));
    s_.add_clause(cl);
  }

  bool already_blocked(const Cube& c, unsigned level) const {
    for (unsigned j = level; j <= top(); ++j) {
      for (const Cube& d : lemmas_[j]) {
        if (subsumes(d, c)) return true;
      }
    }
    return false;
  }

  void open_frame() {
    act_.push_back(s_.new_lit());
    lemmas_.emplace_back();
    ++stats_.frames_opened;
    stats_.clauses_generated_per_frame.push_back(0);
  }

  Trace make_trace(int idx) const {
    Trace tr;
    const Cube& c = obs_[static_cast<std::size_t>(idx)].cube;
    tr.initial_latches.assign(aig_.num_latches(), false);
    for (std::uint32_t i = 0; i < aig_.num_latches(); ++i) {
      tr.initial_latches[i] = aig_.latches[i].init == netlist::LatchInit::kOne;
    }
    for (StateLit l : c) {
      if (aig_.latches[l.latch].init == netlist::LatchInit::kUndefined) tr.initial_latches[l.latch] = !l.negated;
    }
    for (int j = idx; j >= 0; j = obs_[static_cast<std::size_t>(j)].parent) {
      tr.inputs.push_back(obs_[static_cast<std::size_t>(j)].inputs);
    }
    return tr;
  }

  // Blocks a bad cube at the frontier. Returns the index of an obligation
  // meeting the initial states when a counterexample exists, else -1.
  int block(Cube bad_cube, std::vector<bool> inputs) {
    const unsigned k = top();
    obs_.clear();
    obs_.push_back({std::move(bad_cube), k, -1, std::move(inputs)});
    if (intersects_init(obs_[0].cube)) return 0;
    std::set<std::pair<unsigned, long>> queue{{k, 0}};
    while (!queue.empty()) {
      auto [level, neg] = *queue.begin();
      queue.erase(queue.begin());
      const int idx = static_cast<int>(-neg);
      ++stats_.proof_obligations;
      Cube c = obs_[static_cast<std::size_t>(idx)].cube;
      if (already_blocked(c, level)) continue;
      Cube reduced;
      if (!blocked_relative(c, level, Phase::kSat, &reduced)) {
        Cube pred = lift(last_pred_, last_inputs_, &c);
        obs_.push_back({std::move(pred), level - 1, idx, last_inputs_});
        const int p = static_cast<int>(obs_.size()) - 1;
        if (intersects_init(obs_.back().cube)) return p;
        queue.insert({level - 1, -static_cast<long>(p)});
        queue.insert({level, neg});
        continue;
      }
      Cube g = generalize(std::move(reduced), level);
      unsigned at = level;
      while (at < k) {
        Cube r2;
        if (!blocked_relative(g, at + 1, Phase::kGeneralize, &r2)) break;
        g = std::move(r2);
        ++at;
      }
      add_lemma(g, at);
      ++stats_.clauses_generated_per_frame[at - 1];
      if (at < k) queue.insert({at + 1, neg});
    }
    return -1;
  }

  // Returns the level i with F_i = F_{i+1}, or 0.
  unsigned propagate() {
    for (unsigned i = 1; i < top(); ++i) {
      std::vector<Cube> current = lemmas_[i];
      for (const Cube& c : current) {
        if (std::find(lemmas_[i].begin(), lemmas_[i].end(), c) == lemmas_[i].end()) continue;
        std::vector<Lit> as = frame_assumptions(i);
        for (StateLit l : c) as.push_back(next_lit(l));
        if (query(s_, as, Phase::kPush) == sat::Status::kUnsat) {
          auto& v = lemmas_[i];
          v.erase(std::find(v.begin(), v.end(), c));
          add_lemma(c, i + 1);
          ++stats_.clauses_pushed;
        }
      }
      if (lemmas_[i].empty()) return i;
    }
    return 0;
  }

  void solve_main(CheckResult& r) {
    if (query(s_, {init_act_, bad_}, Phase::kSat) == sat::Status::kSat) {
      Trace tr;
      for (Lit l : cur_) tr.initial_latches.push_back(s_.model_value(l));
      tr.inputs.push_back(model_inputs());
      r.verdict = Verdict::kUnsafe;
      r.trace = std::move(tr);
      return;
    }
    open_frame();
    for (;;) {
      for (;;) {
        std::vector<Lit> as = frame_assumptions(top());
        as.push_back(bad_);
        if (query(s_, as, Phase::kSat) == sat::Status::kUnsat) break;
        std::vector<bool> inputs = model_inputs();
        Cube c = lift(model_state(), inputs, nullptr);
        int cex = block(std::move(c), std::move(inputs));
        if (cex >= 0) {
          r.verdict = Verdict::kUnsafe;
          r.trace = make_trace(cex);
          return;
        }
      }
      if (top() >= lim_.max_frames) throw Abort{"frames"};
      open_frame();
      if (unsigned i = propagate(); i > 0) {
        std::vector<StateClause> inv;
        for (unsigned j = i + 1; j <= top(); ++j) {
          for (const Cube& c : lemmas_[j]) inv.push_back(negate(c));
        }
        if (!verify_invariant(aig_, inv)) throw std::logic_error("pdr: invariant failed verification");
        r.verdict = Verdict::kSafe;
        r.proof_frames = i;
        r.invariant = std::move(inv);
        return;
      }
    }
  }

  const AigCircuit& aig_;
  PdrLimits lim_;
  Clock::time_point t0_;
  PdrStats stats_;
  std::uint64_t effort_ = 0;

  sat::Solver s_;
  Lit true_;
  std::vector<Lit> cur_, in_, next_;
  Lit bad_;
  Lit init_act_;
  std::vector<Lit> act_;
  std::vector<std::vector<Cube>> lemmas_;

  sat::Solver ls_;
  std::vector<Lit> lcur_, lin_, lnext_;
  Lit lbad_;
  std::vector<int> latch_of_var_;

  std::vector<Obligation> obs_;
  Cube last_pred_;
  std::vector<bool> last_inputs_;
};

}  // namespace

CheckResult pdr(const AigCircuit& aig, const PdrLimits& limits) {
  if (limits.max_frames == 0) throw std::invalid_argument("pdr: max_frames must be positive");
  return Pdr(aig, limits).run();
}

bool verify_invariant(const AigCircuit& aig, const std::vector<StateClause>& invariant) {
  sat::Solver s;
  Lit tru = make_true(s);
  FrameEncoder f(aig, s, tru);
  std::vector<Lit> cur, next;
  for (std::uint32_t i = 0; i < aig.num_inputs; ++i) f.set_input(i, s.new_lit());
  for (std::uint32_t i = 0; i < aig.num_latches(); ++i) {
    cur.push_back(s.new_lit());
    f.set_latch(i, cur.back());
  }
  for (const auto& l : aig.latches) next.push_back(f.lit(l.next));
  Lit bad = f.bad_any();

  auto lit_of = [](const std::vector<Lit>& vars, StateLit l) { return l.negated ? ~vars[l.latch] : vars[l.latch]; };
  // inv over current state, under p.
  Lit p = s.new_lit();
  for (const StateClause& c : invariant) {
    std::vector<Lit> cl{~p};
    for (StateLit l : c) cl.push_back(lit_of(cur, l));
    s.add_clause(cl);
  }
  // not inv over a state vector, under the returned activation literal.
  auto negated_inv = [&](const std::vector<Lit>& vars) {
    Lit q = s.new_lit();
    std::vector<Lit> any{~q};
    for (const StateClause& c : invariant) {
      Lit a = s.new_lit();
      any.push_back(a);
      for (StateLit l : c) s.add_clause({~a, ~lit_of(vars, l)});
    }
    s.add_clause(any);
    return q;
  };

  std::vector<Lit> init{negated_inv(cur)};
  for (std::uint32_t i = 0; i < aig.num_latches(); ++i) {
    if (aig.latches[i].init == netlist::LatchInit::kZero) init.push_back(~cur[i]);
    if (aig.latches[i].init == netlist::LatchInit::kOne) init.push_back(cur[i]);
  }
  if (s.solve(init) != sat::Status::kUnsat) return false;
  if (s.solve({p, negated_inv(next)}) != sat::Status::kUnsat) return false;
  return s.solve({p, bad}) == sat::Status::kUnsat;
}

}  // namespace evolvegen::checker
