#include "evolvegen/sat/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace evolvegen::sat {

namespace {

// Luby restart sequence (y = 2), as in MiniSat.
double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    seq++;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    seq--;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

Solver::Solver(SolverOptions options) : opts_(options), rand_state_(options.seed) {}

Var Solver::new_var() {
  Var v = static_cast<Var>(assigns_.size());
  assigns_.push_back(kUndef);
  levels_.push_back(0);
  reasons_.push_back(kNoReason);
  polarity_.push_back(true);  // prefer false first
  activity_.push_back(0.0);
  heap_index_.push_back(-1);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::span<const Lit> input) {
  if (!ok_) return false;
  cancel_until(0);
  std::vector<Lit> lits(input.begin(), input.end());
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i] == ~lits[i - 1]) return true;  // tautology
  }
  originals_.push_back(lits);
  ++num_original_;

  std::size_t j = 0;
  for (Lit l : lits) {
    std::int8_t v = value(l);
    if (v == kTrue) return true;
    if (v == kUndef) lits[j++] = l;
  }
  lits.resize(j);
  if (lits.empty()) {
    ok_ = false;
    return false;
  }
  if (lits.size() == 1) {
    enqueue(lits[0], kNoReason);
    if (propagate() != kNoReason) ok_ = false;
    return ok_;
  }
  attach(std::move(lits), false);
  return true;
}

std::uint32_t Solver::attach(std::vector<Lit> lits, bool learnt) {
  auto cref = static_cast<std::uint32_t>(clauses_.size());
  ClauseData c;
  c.lits = std::move(lits);
  c.learnt = learnt;
  watches_[(~c.lits[0]).x].push_back({cref, c.lits[1]});
  watches_[(~c.lits[1]).x].push_back({cref, c.lits[0]});
  clauses_.push_back(std::move(c));
  if (learnt) learnts_.push_back(cref);
  return cref;
}

void Solver::enqueue(Lit l, std::uint32_t reason) {
  auto v = static_cast<std::size_t>(l.var());
  assigns_[v] = l.sign() ? kFalse : kTrue;
  levels_[v] = decision_level();
  reasons_[v] = reason;
  trail_.push_back(l);
}

std::uint32_t Solver::propagate() {
  std::uint32_t conflict = kNoReason;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    std::vector<Watcher>& ws = watches_[p.x];
    stats_.propagations++;
    std::size_t i = 0;
    std::size_t j = 0;
    const std::size_t n = ws.size();
    while (i < n) {
      Watcher w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      ClauseData& c = clauses_[w.cref];
      if (c.deleted) {
        ++i;
        continue;
      }
      Lit false_lit = ~p;
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      ++i;
      Lit first = c.lits[0];
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool found = false;
      for (std::size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != kFalse) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[(~c.lits[1]).x].push_back({w.cref, first});
          found = true;
          break;
        }
      }
      if (found) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == kFalse) {
        conflict = w.cref;
        qhead_ = trail_.size();
        while (i < n) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (conflict != kNoReason) break;
  }
  return conflict;
}

void Solver::bump_var(Var v) {
  auto idx = static_cast<std::size_t>(v);
  if ((activity_[idx] += var_inc_) > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_contains(v)) heap_up(static_cast<std::size_t>(heap_index_[idx]));
}

void Solver::bump_clause(ClauseData& c) {
  if ((c.activity += cla_inc_) > 1e20) {
    for (std::uint32_t cref : learnts_) clauses_[cref].activity *= 1e-20;
    cla_inc_ *= 1e-20;
  }
}

void Solver::decay_activities() {
  var_inc_ /= opts_.var_decay;
  cla_inc_ /= opts_.clause_decay;
}

void Solver::analyze(std::uint32_t conflict, std::vector<Lit>& learnt, int& backtrack_level) {
  int path_count = 0;
  Lit p{0xFFFFFFFFu};
  learnt.clear();
  learnt.push_back(Lit{});  // placeholder for the asserting literal
  std::size_t index = trail_.size();

  do {
    ClauseData& c = clauses_[conflict];
    if (c.learnt) bump_clause(c);
    for (std::size_t k = (p.x == 0xFFFFFFFFu) ? 0 : 1; k < c.lits.size(); ++k) {
      Lit q = c.lits[k];
      auto qv = static_cast<std::size_t>(q.var());
      if (!seen_[qv] && level(q.var()) > 0) {
        bump_var(q.var());
        seen_[qv] = 1;
        if (level(q.var()) >= decision_level()) {
          path_count++;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[static_cast<std::size_t>(trail_[--index].var())]) {
    }
    p = trail_[index];
    conflict = reasons_[static_cast<std::size_t>(p.var())];
    seen_[static_cast<std::size_t>(p.var())] = 0;
    path_count--;
  } while (path_count > 0);
  learnt[0] = ~p;

  // Local/recursive minimisation.
  analyze_toclear_ = learnt;
  std::uint32_t abstract_levels = 0;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    abstract_levels |= 1u << (static_cast<unsigned>(level(learnt[k].var())) & 31u);
  }
  std::size_t j = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    if (reasons_[static_cast<std::size_t>(learnt[k].var())] == kNoReason ||
        !lit_redundant(learnt[k], abstract_levels)) {
      learnt[j++] = learnt[k];
    }
  }
  learnt.resize(j);
  stats_.learnt_literals += learnt.size();

  if (learnt.size() == 1) {
    backtrack_level = 0;
  } else {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k) {
      if (level(learnt[k].var()) > level(learnt[max_i].var())) max_i = k;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level(learnt[1].var());
  }
  for (Lit l : analyze_toclear_) seen_[static_cast<std::size_t>(l.var())] = 0;
}

bool Solver::lit_redundant(Lit l, std::uint32_t abstract_levels) {
  analyze_stack_.clear();
  analyze_stack_.push_back(l);
  std::size_t top = analyze_toclear_.size();
  while (!analyze_stack_.empty()) {
    Lit q = analyze_stack_.back();
    analyze_stack_.pop_back();
    std::uint32_t r = reasons_[static_cast<std::size_t>(q.var())];
    ClauseData& c = clauses_[r];
    for (std::size_t k = 1; k < c.lits.size(); ++k) {
      Lit p = c.lits[k];
      auto pv = static_cast<std::size_t>(p.var());
      if (!seen_[pv] && level(p.var()) > 0) {
        if (reasons_[pv] != kNoReason &&
            (abstract_levels & (1u << (static_cast<unsigned>(level(p.var())) & 31u))) != 0) {
          seen_[pv] = 1;
          analyze_stack_.push_back(p);
          analyze_toclear_.push_back(p);
        } else {
          for (std::size_t m = top; m < analyze_toclear_.size(); ++m) {
            seen_[static_cast<std::size_t>(analyze_toclear_[m].var())] = 0;
          }
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
  }
  return true;
}

// Computes the set of assumptions that force ~p (p is the violated
// assumption's negation, i.e. ~p is the assumption that is false).
void Solver::analyze_final(Lit p) {
  core_.clear();
  core_.push_back(~p);
  if (decision_level() == 0) return;
  seen_[static_cast<std::size_t>(p.var())] = 1;
  for (std::size_t i = trail_.size(); i-- > static_cast<std::size_t>(trail_lim_[0]);) {
    Var x = trail_[i].var();
    auto xv = static_cast<std::size_t>(x);
    if (!seen_[xv]) continue;
    if (reasons_[xv] == kNoReason) {
      if (level(x) > 0) core_.push_back(trail_[i]);
    } else {
      const ClauseData& c = clauses_[reasons_[xv]];
      for (std::size_t k = 1; k < c.lits.size(); ++k) {
        if (level(c.lits[k].var()) > 0) seen_[static_cast<std::size_t>(c.lits[k].var())] = 1;
      }
    }
    seen_[xv] = 0;
  }
  seen_[static_cast<std::size_t>(p.var())] = 0;
}

void Solver::cancel_until(int lvl) {
  if (decision_level() <= lvl) return;
  for (std::size_t i = trail_.size(); i-- > static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(lvl)]);) {
    auto v = static_cast<std::size_t>(trail_[i].var());
    assigns_[v] = kUndef;
    reasons_[v] = kNoReason;
    if (opts_.phase_saving) polarity_[v] = trail_[i].sign();
    if (!heap_contains(static_cast<Var>(v))) heap_insert(static_cast<Var>(v));
  }
  trail_.resize(static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(lvl)]));
  trail_lim_.resize(static_cast<std::size_t>(lvl));
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  Var next = -1;
  if (opts_.random_var_freq > 0.0 && !heap_.empty()) {
    rand_state_ = rand_state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    double r = static_cast<double>(rand_state_ >> 11) / 9007199254740992.0;
    if (r < opts_.random_var_freq) {
      Var cand = heap_[static_cast<std::size_t>(rand_state_ % heap_.size())];
      if (assigns_[static_cast<std::size_t>(cand)] == kUndef) next = cand;
    }
  }
  while (next == -1 || assigns_[static_cast<std::size_t>(next)] != kUndef) {
    if (heap_.empty()) return Lit{0xFFFFFFFFu};
    next = heap_pop();
  }
  return Lit::make(next, polarity_[static_cast<std::size_t>(next)]);
}

bool Solver::locked(std::uint32_t cref) const {
  const ClauseData& c = clauses_[cref];
  Lit l = c.lits[0];
  return value(l) == kTrue && reasons_[static_cast<std::size_t>(l.var())] == cref;
}

void Solver::reduce_db() {
  std::sort(learnts_.begin(), learnts_.end(), [&](std::uint32_t a, std::uint32_t b) {
    const ClauseData& ca = clauses_[a];
    const ClauseData& cb = clauses_[b];
    if ((ca.lits.size() > 2) != (cb.lits.size() > 2)) return ca.lits.size() > 2;
    if (ca.activity != cb.activity) return ca.activity < cb.activity;
    return a < b;
  });
  double extra_lim = cla_inc_ / static_cast<double>(std::max<std::size_t>(learnts_.size(), 1));
  std::size_t j = 0;
  for (std::size_t i = 0; i < learnts_.size(); ++i) {
    ClauseData& c = clauses_[learnts_[i]];
    if (c.lits.size() > 2 && !locked(learnts_[i]) &&
        (i < learnts_.size() / 2 || c.activity < extra_lim)) {
      c.deleted = true;
      std::vector<Lit>().swap(c.lits);
    } else {
      learnts_[j++] = learnts_[i];
    }
  }
  learnts_.resize(j);
  detach_deleted();
}

void Solver::detach_deleted() {
  for (auto& ws : watches_) {
    ws.erase(std::remove_if(ws.begin(), ws.end(),
                            [&](const Watcher& w) { return clauses_[w.cref].deleted; }),
             ws.end());
  }
}

bool Solver::budget_exhausted() const {
  if (conflict_budget_ != 0 && stats_.conflicts - solve_start_conflicts_ >= conflict_budget_) return true;
  if (propagation_budget_ != 0 && stats_.propagations - solve_start_props_ >= propagation_budget_) return true;
  return false;
}

Status Solver::search(std::uint64_t conflict_limit) {
  std::uint64_t conflicts_here = 0;
  std::vector<Lit> learnt;
  for (;;) {
    std::uint32_t confl = propagate();
    if (confl != kNoReason) {
      stats_.conflicts++;
      conflicts_here++;
      if (decision_level() == 0) return Status::kUnsat;
      int bt = 0;
      analyze(confl, learnt, bt);
      cancel_until(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        std::uint32_t cref = attach(learnt, true);
        bump_clause(clauses_[cref]);
        enqueue(learnt[0], cref);
      }
      decay_activities();
      continue;
    }
    if (conflicts_here >= conflict_limit || budget_exhausted()) {
      cancel_until(0);
      return Status::kUnknown;
    }
    if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
      reduce_db();
    }
    Lit next{0xFFFFFFFFu};
    while (static_cast<std::size_t>(decision_level()) < assumptions_.size()) {
      Lit a = assumptions_[static_cast<std::size_t>(decision_level())];
      std::int8_t v = value(a);
      if (v == kTrue) {
        trail_lim_.push_back(static_cast<int>(trail_.size()));  // dummy level
      } else if (v == kFalse) {
        analyze_final(~a);
        return Status::kUnsat;
      } else {
        next = a;
        break;
      }
    }
    if (next.x == 0xFFFFFFFFu) {
      stats_.decisions++;
      next = pick_branch();
      if (next.x == 0xFFFFFFFFu) return Status::kSat;
    }
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    enqueue(next, kNoReason);
  }
}

Status Solver::solve(std::span<const Lit> assumptions) {
  stats_.solves++;
  model_.clear();
  core_.clear();
  if (!ok_) return Status::kUnsat;
  cancel_until(0);
  assumptions_.assign(assumptions.begin(), assumptions.end());
  solve_start_conflicts_ = stats_.conflicts;
  solve_start_props_ = stats_.propagations;
  max_learnts_ = std::max(static_cast<double>(num_original_) / 3.0, 2000.0);

  Status status = Status::kUnknown;
  int restart = 0;
  while (status == Status::kUnknown) {
    double limit = luby(2.0, restart) * opts_.restart_base;
    status = search(static_cast<std::uint64_t>(limit));
    if (status == Status::kUnknown && budget_exhausted()) break;
    if (status == Status::kUnknown) stats_.restarts++;
    restart++;
    max_learnts_ *= 1.05;
  }

  if (status == Status::kSat) {
    model_.assign(assigns_.size(), false);
    for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
    if (opts_.check_models) assert(verify_model());
  } else if (status == Status::kUnsat && core_.empty() && decision_level() == 0) {
    ok_ = false;
  }
  cancel_until(0);
  return status;
}

bool Solver::verify_model() const {
  for (const Clause& c : originals_) {
    bool sat = false;
    for (Lit l : c) {
      if (model_value(l)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

void Solver::heap_insert(Var v) {
  heap_index_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(std::size_t i) {
  Var v = heap_[i];
  double a = activity_[static_cast<std::size_t>(v)];
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    Var pv = heap_[parent];
    double pa = activity_[static_cast<std::size_t>(pv)];
    if (pa > a || (pa == a && pv < v)) break;
    heap_[i] = pv;
    heap_index_[static_cast<std::size_t>(pv)] = static_cast<std::int32_t>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_index_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(i);
}

void Solver::heap_down(std::size_t i) {
  Var v = heap_[i];
  double a = activity_[static_cast<std::size_t>(v)];
  const std::size_t n = heap_.size();
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n) {
      Var c0 = heap_[child];
      Var c1 = heap_[child + 1];
      double a0 = activity_[static_cast<std::size_t>(c0)];
      double a1 = activity_[static_cast<std::size_t>(c1)];
      if (a1 > a0 || (a1 == a0 && c1 < c0)) child++;
    }
    Var cv = heap_[child];
    double ca = activity_[static_cast<std::size_t>(cv)];
    if (a > ca || (a == ca && v < cv)) break;
    heap_[i] = cv;
    heap_index_[static_cast<std::size_t>(cv)] = static_cast<std::int32_t>(i);
    i = child;
  }
  heap_[i] = v;
  heap_index_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(i);
}

Var Solver::heap_pop() {
  Var top = heap_.front();
  Var last = heap_.back();
  heap_.pop_back();
  heap_index_[static_cast<std::size_t>(top)] = -1;
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_index_[static_cast<std::size_t>(last)] = 0;
    heap_down(0);
  }
  return top;
}

}  // namespace evolvegen::sat
