#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evolvegen::sat {

using Var = std::int32_t;

// Literal: 2*var + sign, sign = 1 meaning negated.
struct Lit {
  std::uint32_t x = 0;

  static Lit make(Var v, bool negated = false) {
    return Lit{static_cast<std::uint32_t>(v) * 2 + (negated ? 1u : 0u)};
  }
  Var var() const { return static_cast<Var>(x >> 1); }
  bool sign() const { return (x & 1) != 0; }
  Lit operator~() const { return Lit{x ^ 1u}; }
  bool operator==(const Lit&) const = default;
  auto operator<=>(const Lit&) const = default;

  // DIMACS integer (1-based, negative for negated).
  int to_dimacs() const { return sign() ? -(var() + 1) : (var() + 1); }
  static Lit from_dimacs(int d) { return make(d > 0 ? d - 1 : -d - 1, d < 0); }
};

using Clause = std::vector<Lit>;

enum class Status { kSat, kUnsat, kUnknown };

struct SolverStats {
  std::uint64_t solves = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learnt_literals = 0;
};

struct SolverOptions {
  double var_decay = 0.95;
  double clause_decay = 0.999;
  int restart_base = 100;
  bool phase_saving = true;
  // Random decision frequency; 0 keeps the solver fully deterministic.
  double random_var_freq = 0.0;
  std::uint64_t seed = 91648253;
  // Verify every model against the clause database before returning Sat.
  bool check_models = false;
};

// Incremental CDCL solver: two watched literals, first-UIP learning with
// local minimisation, VSIDS activity heap, Luby restarts, phase saving,
// learnt-clause reduction and MiniSat-style assumptions with final-conflict
// analysis for unsat cores.
class Solver {
 public:
  explicit Solver(SolverOptions options = {});
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;
  Solver(Solver&&) = default;
  Solver& operator=(Solver&&) = default;

  Var new_var();
  Lit new_lit() { return Lit::make(new_var()); }
  int num_vars() const { return static_cast<int>(assigns_.size()); }
  std::size_t num_clauses() const { return num_original_; }

  // Returns false once the database is unconditionally unsatisfiable
  // (a "trivial unsat" status); later solve() calls then return kUnsat.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) {
    return add_clause(std::span<const Lit>(lits.begin(), lits.size()));
  }
  bool okay() const { return ok_; }

  Status solve(std::span<const Lit> assumptions = {});
  Status solve(std::initializer_list<Lit> assumptions) {
    return solve(std::span<const Lit>(assumptions.begin(), assumptions.size()));
  }

  // Valid after kSat.
  bool model_value(Var v) const { return model_[static_cast<std::size_t>(v)]; }
  bool model_value(Lit l) const { return model_value(l.var()) != l.sign(); }
  const std::vector<bool>& model() const { return model_; }

  // Valid after kUnsat: subset of the assumptions that is jointly
  // inconsistent with the clause database. Empty if the database itself
  // is unsatisfiable.
  const std::vector<Lit>& core() const { return core_; }

  // Budget for the next solve() calls; 0 means unlimited. Exceeding it
  // returns kUnknown.
  void set_conflict_budget(std::uint64_t conflicts) { conflict_budget_ = conflicts; }
  void set_propagation_budget(std::uint64_t props) { propagation_budget_ = props; }

  const SolverStats& stats() const { return stats_; }

  // Original (non-learnt) clauses as added, after level-0 simplification of
  // duplicates/tautologies only.
  const std::vector<Clause>& original_clauses() const { return originals_; }

 private:
  enum : std::int8_t { kTrue = 1, kFalse = -1, kUndef = 0 };
  static constexpr std::uint32_t kNoReason = 0xFFFFFFFFu;

  struct ClauseData {
    std::vector<Lit> lits;
    double activity = 0.0;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watcher {
    std::uint32_t cref;
    Lit blocker;
  };

  std::int8_t value(Lit l) const {
    std::int8_t v = assigns_[static_cast<std::size_t>(l.var())];
    return l.sign() ? static_cast<std::int8_t>(-v) : v;
  }
  int level(Var v) const { return levels_[static_cast<std::size_t>(v)]; }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit l, std::uint32_t reason);
  std::uint32_t propagate();
  void analyze(std::uint32_t conflict, std::vector<Lit>& learnt, int& backtrack_level);
  bool lit_redundant(Lit l, std::uint32_t abstract_levels);
  void analyze_final(Lit p);
  void cancel_until(int level);
  Lit pick_branch();
  Status search(std::uint64_t conflict_limit);
  std::uint32_t attach(std::vector<Lit> lits, bool learnt);
  void detach_deleted();
  void reduce_db();
  bool locked(std::uint32_t cref) const;
  void bump_var(Var v);
  void bump_clause(ClauseData& c);
  void decay_activities();
  bool budget_exhausted() const;
  bool verify_model() const;

  // Activity-ordered binary max-heap of variables.
  void heap_insert(Var v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  Var heap_pop();
  bool heap_contains(Var v) const { return heap_index_[static_cast<std::size_t>(v)] >= 0; }

  SolverOptions opts_;
  bool ok_ = true;
  std::vector<ClauseData> clauses_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<int> levels_;
  std::vector<std::uint32_t> reasons_;
  std::vector<bool> polarity_;
  std::vector<double> activity_;
  std::vector<Var> heap_;
  std::vector<std::int32_t> heap_index_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<Lit> assumptions_;
  std::vector<std::uint8_t> seen_;
  std::vector<Lit> analyze_stack_;
  std::vector<Lit> analyze_toclear_;
  std::vector<bool> model_;
  std::vector<Lit> core_;
  std::vector<Clause> originals_;
  std::size_t num_original_ = 0;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  double max_learnts_ = 0.0;
  std::uint64_t conflict_budget_ = 0;
  std::uint64_t propagation_budget_ = 0;
  std::uint64_t solve_start_conflicts_ = 0;
  std::uint64_t solve_start_props_ = 0;
  std::uint64_t rand_state_;
  SolverStats stats_;
};

}  // namespace evolvegen::sat
