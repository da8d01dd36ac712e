#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvegen/netlist/aig.hpp"
#include "evolvegen/sat/solver.hpp"

namespace evolvegen::checker {

enum class Verdict { kSafe, kUnsafe, kUnknown };

std::string verdict_name(Verdict v);

// Concrete counterexample: initial latch values (undefined inits resolved)
// and one input vector per time frame. The final frame asserts bad.
struct Trace {
  std::vector<bool> initial_latches;
  std::vector<std::vector<bool>> inputs;
  std::size_t length() const { return inputs.empty() ? 0 : inputs.size() - 1; }
};

// Clause over latch indices: `negated` false means the latch must be 1.
struct StateLit {
  std::uint32_t latch = 0;
  bool negated = false;
  bool operator==(const StateLit&) const = default;
  auto operator<=>(const StateLit&) const = default;
};
using StateClause = std::vector<StateLit>;

struct PdrStats {
  unsigned frames_opened = 0;
  std::vector<std::uint64_t> clauses_generated_per_frame;
  std::uint64_t clauses_pushed = 0;
  std::uint64_t proof_obligations = 0;
  std::uint64_t sat_calls = 0;
  double time_sat = 0;
  double time_generalize = 0;
  double time_push = 0;
  // Solver propagations spent in each phase; the deterministic counterpart
  // of the three times.
  std::uint64_t effort_sat = 0;
  std::uint64_t effort_generalize = 0;
  std::uint64_t effort_push = 0;
};

struct BmcStats {
  unsigned depth_reached = 0;
  std::uint64_t sat_calls = 0;
  std::uint64_t propagations = 0;
};

struct CheckResult {
  Verdict verdict = Verdict::kUnknown;
  std::string reason;         // Unknown only: "bound", "frames", "timeout"
  unsigned proof_frames = 0;  // Safe from pdr: index i with F_i = F_{i+1}
  std::optional<Trace> trace;
  std::vector<StateClause> invariant;
  double wall_time = 0;
  std::optional<PdrStats> pdr_stats;
  std::optional<BmcStats> bmc_stats;
};

struct BmcLimits {
  unsigned max_depth = 20;
  double max_seconds = 0;  // 0 = unlimited
};

CheckResult bmc(const netlist::AigCircuit& aig, const BmcLimits& limits);
inline CheckResult bmc(const netlist::AigCircuit& aig, unsigned max_depth) {
  return bmc(aig, BmcLimits{max_depth, 0});
}

struct PdrLimits {
  unsigned max_frames = 100;
  double max_seconds = 0;             // 0 = unlimited
  std::uint64_t max_propagations = 0;  // 0 = unlimited; deterministic budget
};

CheckResult pdr(const netlist::AigCircuit& aig, const PdrLimits& limits);

// Simulates the trace; true when bad holds at the final frame. The property
// is the disjunction of all bad literals.
bool replay_trace(const netlist::AigCircuit& aig, const Trace& trace);

// Init implies inv, inv and T imply inv', inv implies not bad. One SAT query each.
bool verify_invariant(const netlist::AigCircuit& aig, const std::vector<StateClause>& invariant);

struct DynamicFeatures {
  double clauses_mean = 0;
  double clauses_std = 0;
  double clauses_max = 0;
  double clauses_total = 0;
  double clauses_pushed = 0;
  double obligations = 0;
  double sat_calls = 0;
  double frames_reached = 0;
  // Fractions of the phase total, from the effort counters.
  double frac_sat = 0;
  double frac_generalize = 0;
  double frac_push = 0;
  // Wall-clock seconds; reported but kept out of the feature vector.
  double time_sat = 0;
  double time_generalize = 0;
  double time_push = 0;

  static constexpr std::size_t kCount = 11;
  std::array<double, kCount> to_array() const;
  static const std::array<std::string_view, kCount>& names();
};

DynamicFeatures features_from_stats(const PdrStats& stats);

struct DynamicRun {
  DynamicFeatures features;
  CheckResult result;
};

// Fixed-depth PDR run. The propagation budget keeps the structural fields
// reproducible; the wall-clock budget is a safety net.
DynamicRun dynamic_features(const netlist::AigCircuit& aig, unsigned frames = 5,
                            double budget_seconds = 10, std::uint64_t budget_propagations = 20'000'000);

enum class ResultGrammar { kCertificateLine, kWitnessFile, kExitCode };

std::string grammar_name(ResultGrammar g);
ResultGrammar parse_grammar(const std::string& name);

struct ExternalAdapter {
  std::string name;
  // Placeholders: {file}, {timeout} (whole seconds) and {witness}, a path
  // the checker may write its result to.
  std::string command_template;
  std::string format = "aiger";  // aiger | btor2
  ResultGrammar grammar = ResultGrammar::kCertificateLine;
  // Exit-code grammar: status values meaning safe / unsafe.
  int safe_exit = 20;
  int unsafe_exit = 10;
};

struct ExternalResult {
  Verdict verdict = Verdict::kUnknown;
  std::string reason;
  double wall_time = 0;
  int exit_status = 0;
  std::string output;
};

// Spawns the adapter command through /bin/sh. Output is kept in the result
// and, when log_path is given, written there. Throws SpawnError when the
// command cannot be executed and ParseError when its output does not match
// the grammar.
ExternalResult run_external(const ExternalAdapter& adapter, const std::string& problem_path,
                            double timeout_s, const std::string& log_path = "");

// Parses checker output for one grammar; exposed for testing.
Verdict parse_external_output(ResultGrammar grammar, const std::string& output, int exit_status,
                              const ExternalAdapter& adapter);

}  // namespace evolvegen::checker
